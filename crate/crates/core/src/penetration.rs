//! Force balance on the corer and a desk-scale trial simulator.
//!
//! The net penetration force is `F_p = F_e + W_b − Q_t − F_t`: the driving
//! force plus buoyant weight, minus tip bearing and side friction. The
//! sediment resistance law and the capture-efficiency law used here are
//! model choices, not measurements; the presets are tuned only so that the
//! three coring patterns rank the way the bench experiments did.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{CoreGeometry, KinematicsError, PatternSpec};

/// Standard gravity, m/s².
const STANDARD_GRAVITY: f64 = 9.80665;
/// Thrust limit of the linear actuator, kg-force.
pub const ACTUATOR_LIMIT_KGF: f64 = 15.0;
/// Per-motor current limit, A.
pub const DEFAULT_CURRENT_LIMIT: f64 = 3.0;
/// Default target depth, mm.
pub const DEFAULT_TARGET_DEPTH: f64 = 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("invalid sediment `{name}`: {reason}")]
    Sediment { name: String, reason: String },
    #[error("invalid trial configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SimError::NonFinite(name))
    }
}

fn non_negative(name: &'static str, x: f64) -> Result<f64> {
    finite(name, x)?;
    if x < 0.0 {
        Err(SimError::Negative { name, value: x })
    } else {
        Ok(x)
    }
}

/// Axial force balance on the corer, N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceBalance {
    pub external: f64,
    pub buoyant_weight: f64,
    pub tip_bearing: f64,
    pub side_friction: f64,
    pub net: f64,
}

impl ForceBalance {
    /// Penetration proceeds only on a strictly positive net force.
    pub fn can_penetrate(&self) -> bool {
        self.net > 0.0
    }
}

pub fn penetration_force(
    external: f64,
    buoyant_weight: f64,
    tip_bearing: f64,
    side_friction: f64,
) -> Result<ForceBalance> {
    finite("F_e", external)?;
    finite("W_b", buoyant_weight)?;
    non_negative("Q_t", tip_bearing)?;
    non_negative("F_t", side_friction)?;
    Ok(ForceBalance {
        external,
        buoyant_weight,
        tip_bearing,
        side_friction,
        net: external + buoyant_weight - tip_bearing - side_friction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// Coefficients chosen to reproduce a qualitative ordering only.
    Qualitative,
    Measured,
}

/// A sediment and the coefficients of its resistance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SedimentSpec {
    pub name: String,
    /// Median grain diameter, µm.
    pub d50_um: f64,
    pub usda_class: String,
    /// Tip bearing at zero depth, N.
    pub bearing_intercept: f64,
    /// Growth of tip bearing with depth, N/mm.
    pub bearing_gradient: f64,
    /// Axial side friction per mm of embedded wall, N/mm.
    pub friction_coeff: f64,
    /// Fraction of side friction relieved by tangential motion, in [0, 1].
    pub rotation_relief: f64,
    /// g/cm³.
    pub bulk_density: f64,
    pub capture_gain: f64,
    pub calibration: Calibration,
}

impl SedimentSpec {
    pub fn coarse_sand() -> Self {
        Self {
            name: "coarse_sand".into(),
            d50_um: 409.85,
            usda_class: "coarse sand".into(),
            bearing_intercept: 15.0,
            bearing_gradient: 0.15,
            friction_coeff: 0.65,
            rotation_relief: 0.6,
            bulk_density: 1.9,
            capture_gain: 0.35,
            calibration: Calibration::Qualitative,
        }
    }

    pub fn medium_sand() -> Self {
        Self {
            name: "medium_sand".into(),
            d50_um: 408.58,
            usda_class: "medium sand".into(),
            bearing_intercept: 10.0,
            bearing_gradient: 0.12,
            friction_coeff: 0.5,
            rotation_relief: 0.5,
            bulk_density: 1.9,
            capture_gain: 0.4,
            calibration: Calibration::Qualitative,
        }
    }

    pub fn silt() -> Self {
        Self {
            name: "silt".into(),
            d50_um: 45.26,
            usda_class: "silt".into(),
            bearing_intercept: 5.0,
            bearing_gradient: 0.05,
            friction_coeff: 0.3,
            rotation_relief: 0.3,
            bulk_density: 1.7,
            capture_gain: 2.5,
            calibration: Calibration::Qualitative,
        }
    }

    pub fn presets() -> Vec<Self> {
        vec![Self::coarse_sand(), Self::medium_sand(), Self::silt()]
    }

    pub fn preset(name: &str) -> Option<Self> {
        Self::presets().into_iter().find(|s| s.name == name)
    }

    /// A sediment that offers no resistance at all.
    pub fn frictionless(name: &str) -> Self {
        Self {
            name: name.into(),
            d50_um: 1.0,
            usda_class: "none".into(),
            bearing_intercept: 0.0,
            bearing_gradient: 0.0,
            friction_coeff: 0.0,
            rotation_relief: 0.0,
            bulk_density: 1.0,
            capture_gain: 1.0,
            calibration: Calibration::Qualitative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| SimError::Sediment {
            name: self.name.clone(),
            reason,
        };
        for (field, value) in [
            ("d50_um", self.d50_um),
            ("bearing_intercept", self.bearing_intercept),
            ("bearing_gradient", self.bearing_gradient),
            ("friction_coeff", self.friction_coeff),
            ("rotation_relief", self.rotation_relief),
            ("bulk_density", self.bulk_density),
            ("capture_gain", self.capture_gain),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(bad(format!("{field} must be finite and >= 0, got {value}")));
            }
        }
        if self.d50_um <= 0.0 {
            return Err(bad("d50_um must be positive".into()));
        }
        if self.rotation_relief > 1.0 {
            return Err(bad("rotation_relief must be <= 1".into()));
        }
        if self.name.trim().is_empty() {
            return Err(bad("empty name".into()));
        }
        Ok(())
    }
}

/// Resistance at one instant, N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resistance {
    pub tip_bearing: f64,
    pub side_friction: f64,
    /// Friction component opposing rotation (drives motor 2 torque).
    pub tangential_friction: f64,
    /// Axial share of the rim velocity direction, in (0, 1].
    pub axial_fraction: f64,
}

/// Tip bearing grows linearly with depth and scales with the wall annulus
/// relative to the default liner. Wall friction acts against the rim
/// velocity, so only its axial share resists penetration; tangential motion
/// additionally relieves part of it.
pub fn resistance_forces(
    sediment: &SedimentSpec,
    geom: &CoreGeometry,
    depth: f64,
    feed: f64,
    angular_speed: f64,
) -> Result<Resistance> {
    non_negative("depth", depth)?;
    non_negative("v", feed)?;
    let angular_speed = finite("omega_r", angular_speed)?.abs();
    let annulus_factor = geom.annulus_area() / CoreGeometry::default().annulus_area();
    let tip_bearing =
        (sediment.bearing_intercept + sediment.bearing_gradient * depth) * annulus_factor;

    let tangential = angular_speed * geom.kinematic_radius();
    let speed = feed.hypot(tangential);
    let (axial_fraction, tangential_share) = if speed > 0.0 {
        (feed / speed, tangential / speed)
    } else {
        (1.0, 0.0)
    };
    let relief = 1.0 - sediment.rotation_relief * (1.0 - axial_fraction);
    let wall = sediment.friction_coeff * depth * relief;
    Ok(Resistance {
        tip_bearing,
        side_friction: wall * axial_fraction,
        tangential_friction: wall * tangential_share,
        axial_fraction,
    })
}

/// Linear current model of both motors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    /// No-load current of the feed motor, A.
    pub feed_no_load: f64,
    /// A per N of axial load.
    pub feed_gain: f64,
    /// No-load current of the rotary motor, A.
    pub rotary_no_load: f64,
    /// A per N·mm of torque.
    pub rotary_gain: f64,
    /// Per-motor current limit, A.
    pub current_limit: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            feed_no_load: 0.3,
            feed_gain: 0.012,
            rotary_no_load: 0.25,
            rotary_gain: 4e-4,
            current_limit: DEFAULT_CURRENT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotorCurrents {
    pub c1: f64,
    pub c2: f64,
    /// Set when either demand exceeded the limit and was clamped.
    pub limited: bool,
}

pub fn motor_currents(
    force_demand: f64,
    torque_demand: f64,
    params: &MotorParams,
) -> MotorCurrents {
    let raw1 = params.feed_no_load + params.feed_gain * force_demand.max(0.0);
    let raw2 = params.rotary_no_load + params.rotary_gain * torque_demand.max(0.0);
    let limit = params.current_limit;
    MotorCurrents {
        c1: raw1.min(limit),
        c2: raw2.min(limit),
        limited: raw1 > limit || raw2 > limit,
    }
}

/// Driving force of the feed actuator over time, N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ForceProfile {
    Constant {
        force_n: f64,
    },
    /// Linear ramp from zero saturating at `limit_n`.
    Ramp {
        rate_n_per_s: f64,
        limit_n: f64,
    },
}

impl Default for ForceProfile {
    fn default() -> Self {
        ForceProfile::Constant {
            force_n: ACTUATOR_LIMIT_KGF * STANDARD_GRAVITY,
        }
    }
}

impl ForceProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            ForceProfile::Constant { force_n } => force_n,
            ForceProfile::Ramp {
                rate_n_per_s,
                limit_n,
            } => (rate_n_per_s * t).min(limit_n),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ForceProfile::Constant { force_n } => {
                finite("F_e", force_n)?;
            }
            ForceProfile::Ramp {
                rate_n_per_s,
                limit_n,
            } => {
                finite("F_e ramp rate", rate_n_per_s)?;
                finite("F_e limit", limit_n)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    /// L_d, mm.
    pub target_depth: f64,
    /// Integration step, s.
    pub dt: f64,
    pub external_force: ForceProfile,
    /// W_b, N.
    pub buoyant_weight: f64,
    pub motors: MotorParams,
    pub seed: u64,
    /// Half-width of the uniform relative scatter applied to the recovered mass.
    pub mass_noise: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            target_depth: DEFAULT_TARGET_DEPTH,
            dt: 1e-3,
            external_force: ForceProfile::default(),
            buoyant_weight: 0.0,
            motors: MotorParams::default(),
            seed: 0,
            mass_noise: 0.03,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self, geom: &CoreGeometry) -> Result<()> {
        finite("target_depth", self.target_depth)?;
        finite("dt", self.dt)?;
        if self.target_depth <= 0.0 {
            return Err(SimError::Config("target depth must be positive".into()));
        }
        if self.target_depth > geom.liner_length() {
            return Err(SimError::Config(format!(
                "target depth {} mm exceeds liner length {} mm",
                self.target_depth,
                geom.liner_length()
            )));
        }
        if self.dt <= 0.0 {
            return Err(SimError::Config("dt must be positive".into()));
        }
        finite("W_b", self.buoyant_weight)?;
        self.external_force.validate()?;
        let m = &self.motors;
        for (name, x) in [
            ("feed_no_load", m.feed_no_load),
            ("feed_gain", m.feed_gain),
            ("rotary_no_load", m.rotary_no_load),
            ("rotary_gain", m.rotary_gain),
            ("current_limit", m.current_limit),
            ("mass_noise", self.mass_noise),
        ] {
            non_negative(name, x)?;
        }
        if self.mass_noise >= 1.0 {
            return Err(SimError::Config("mass_noise must be < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    ReachedDepth,
    Stalled,
    CurrentLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedDepth => "reached_depth",
            Termination::Stalled => "stalled",
            Termination::CurrentLimit => "current_limit",
        }
    }
}

impl std::str::FromStr for Termination {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "reached_depth" => Ok(Termination::ReachedDepth),
            "stalled" => Ok(Termination::Stalled),
            "current_limit" => Ok(Termination::CurrentLimit),
            other => Err(format!("unknown termination `{other}`")),
        }
    }
}

/// One logged instant of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    /// Tip elevation, mm (≤ 0).
    pub z: f64,
    pub theta: f64,
    /// Realised penetration force, N. Zero while the corer is held back.
    pub force: f64,
    pub c1: f64,
    pub c2: f64,
    /// Cumulative rim path length, mm.
    pub travel: f64,
}

/// Peak motor currents seen during a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentLog {
    pub peak_c1: f64,
    pub peak_c2: f64,
    /// The trial hit the current limit.
    pub limit_hit: bool,
}

impl CurrentLog {
    pub fn merge(self, other: CurrentLog) -> CurrentLog {
        CurrentLog {
            peak_c1: self.peak_c1.max(other.peak_c1),
            peak_c2: self.peak_c2.max(other.peak_c2),
            limit_hit: self.limit_hit || other.limit_hit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub pattern: PatternSpec,
    pub sediment: String,
    pub samples: Vec<Sample>,
    /// m_s, g.
    pub mass_g: f64,
    /// Penetration depth, mm.
    pub depth: f64,
    /// Rim path length s, mm.
    pub travel: f64,
    /// s.
    pub duration: f64,
    /// ∫ F_p ds, N·mm.
    pub work: f64,
    pub terminated_by: Termination,
    /// Work could not be verified from a time series.
    pub no_timeseries: bool,
}

impl TrialRecord {
    /// Peak currents from the time series, if one is attached.
    pub fn current_log(&self) -> Option<CurrentLog> {
        if self.samples.is_empty() {
            return None;
        }
        let (peak_c1, peak_c2) = self
            .samples
            .iter()
            .fold((0.0f64, 0.0f64), |(a, b), s| (a.max(s.c1), b.max(s.c2)));
        Some(CurrentLog {
            peak_c1,
            peak_c2,
            limit_hit: self.terminated_by == Termination::CurrentLimit,
        })
    }
}

/// Mixes a base seed with a trial id into an independent stream seed.
pub fn trial_seed(base: u64, trial_id: u64) -> u64 {
    let mut z = base ^ trial_id.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of the captured column retained: `1 − exp(−α·(1 + τ))`, where
/// `τ` is the tangential share of the rim travel discounted by net wind-up
/// of the liner (in turns). Oscillating rotation scores highest, continuous
/// rotation next, pure feed lowest. Not a physical law.
pub fn capture_efficiency(capture_gain: f64, tangential_fraction: f64) -> f64 {
    (1.0 - (-capture_gain * (1.0 + tangential_fraction)).exp()).clamp(0.0, 1.0)
}

const MAX_STEPS: u64 = 50_000_000;

/// Runs one trial with explicit time stepping.
///
/// The corer advances by `v·dt` in every step whose net force is positive and
/// whose motor currents stay under the limit. Linear and helical feeds stop
/// as `Stalled` at the first non-positive net force, since their resistance
/// no longer changes; the zig-zag feed waits up to one reversal period for
/// the rotation phase to free it.
pub fn simulate_trial(
    trial_id: u64,
    pattern: &PatternSpec,
    sediment: &SedimentSpec,
    geom: &CoreGeometry,
    config: &TrialConfig,
) -> Result<TrialRecord> {
    sediment.validate()?;
    config.validate(geom)?;

    let v = pattern.feed();
    let dt = config.dt;
    let target = config.target_depth;
    let r = geom.kinematic_radius();
    let stall_window = pattern.reversal_period();

    let mut samples: Vec<Sample> = Vec::new();
    let mut advanced: u64 = 0;
    let mut paused: u64 = 0;
    let mut stalled_since: Option<f64> = None;
    let mut depth = 0.0;
    let mut t = 0.0;
    let mut travel = 0.0;
    let mut tangential_travel = 0.0;
    let mut work = 0.0;

    let terminated_by = loop {
        let theta = pattern.angle(t);
        let rate = pattern.angular_rate(t);
        let res = resistance_forces(sediment, geom, depth, v, rate)?;
        let fe = config.external_force.at(t);
        let balance = penetration_force(
            fe,
            config.buoyant_weight,
            res.tip_bearing,
            res.side_friction,
        )?;
        let axial_load =
            (res.tip_bearing + res.side_friction - config.buoyant_weight).clamp(0.0, fe.max(0.0));
        let currents = motor_currents(axial_load, res.tangential_friction * r, &config.motors);

        let sample = Sample {
            t,
            z: -depth,
            theta,
            force: balance.net.max(0.0),
            c1: currents.c1,
            c2: currents.c2,
            travel,
        };
        if let Some(prev) = samples.last() {
            work += 0.5 * (prev.force + sample.force) * (sample.travel - prev.travel);
        }
        samples.push(sample);

        if depth >= target {
            break Termination::ReachedDepth;
        }
        if currents.limited {
            break Termination::CurrentLimit;
        }
        let advancing = balance.can_penetrate();
        if advancing {
            stalled_since = None;
        } else {
            match stall_window {
                None => break Termination::Stalled,
                Some(window) => {
                    let since = *stalled_since.get_or_insert(t);
                    if t - since >= window {
                        break Termination::Stalled;
                    }
                }
            }
        }
        if advanced + paused >= MAX_STEPS {
            break Termination::Stalled;
        }

        let (t_next, depth_next) = if advancing {
            advanced += 1;
            let d = v * (advanced as f64 * dt);
            if d >= target {
                (paused as f64 * dt + target / v, target)
            } else {
                ((advanced + paused) as f64 * dt, d)
            }
        } else {
            paused += 1;
            ((advanced + paused) as f64 * dt, depth)
        };
        let dtheta = pattern.angle(t_next) - theta;
        tangential_travel += r * dtheta.abs();
        travel += (depth_next - depth).hypot(r * dtheta);
        depth = depth_next;
        t = t_next;
    };

    let tangential_fraction = if travel > 0.0 {
        let winding_turns = pattern.angle(t).abs() / (2.0 * PI);
        (tangential_travel / travel) / (1.0 + winding_turns)
    } else {
        0.0
    };
    let efficiency = capture_efficiency(sediment.capture_gain, tangential_fraction);
    let column_volume_cm3 = PI * geom.inner_radius().powi(2) * depth / 1000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, trial_id));
    let scatter = if config.mass_noise > 0.0 {
        1.0 + config.mass_noise * rng.random_range(-1.0..=1.0)
    } else {
        1.0
    };
    let mass_g = (efficiency * sediment.bulk_density * column_volume_cm3 * scatter).max(0.0);

    Ok(TrialRecord {
        trial_id,
        pattern: *pattern,
        sediment: sediment.name.clone(),
        samples,
        mass_g,
        depth,
        travel,
        duration: t,
        work,
        terminated_by,
        no_timeseries: false,
    })
}
