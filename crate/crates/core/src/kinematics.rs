//! Parametric coring trajectories.
//!
//! A point on the rim of the core liner follows one of three motions while the
//! liner is fed downward at constant speed `v`:
//!
//! * linear: no rotation, `θ(t) = 0`
//! * helical: constant rotation, `θ(t) = ω·t`
//! * zig-zag: oscillating rotation, `θ(t) = 10·ω·|sin(0.1·f·t)| / f`
//!
//! The rim point sits at `(r·sin θ, r·cos θ, −v·t)`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::gl16;

/// Maximum no-load feed rate of the sampling platform, mm/s.
pub const PLATFORM_MAX_FEED: f64 = 38.0;
/// Maximum angular speed of the rotary motor, rad/s.
pub const PLATFORM_MAX_OMEGA: f64 = 12.0;
/// Maximum direction-change input frequency, Hz.
pub const PLATFORM_MAX_FREQUENCY: f64 = 50.0;

/// Amplitude gain of the zig-zag angle law.
const ZIGZAG_GAIN: f64 = 10.0;
/// Time scale applied to the input frequency inside the zig-zag angle law.
const ZIGZAG_TIME_SCALE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("feed rate must be positive, got {0} mm/s")]
    NonPositiveFeed(f64),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{kind} pattern requires {requirement}")]
    Inconsistent {
        kind: PatternKind,
        requirement: &'static str,
    },
    #[error("zig-zag pattern with zero input frequency is degenerate")]
    DegenerateZigZag,
    #[error("{quantity} = {value} exceeds platform limit {limit}")]
    PlatformLimit {
        quantity: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("invalid core geometry: {0}")]
    Geometry(String),
    #[error("invalid sampling: {0}")]
    Sampling(String),
}

pub type Result<T, E = KinematicsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Linear,
    Helical,
    #[serde(rename = "zigzag")]
    ZigZag,
}

impl PatternKind {
    /// Short pattern class code used in reports (`P1`, `P2`, `P3`).
    pub fn code(self) -> &'static str {
        match self {
            PatternKind::Linear => "P1",
            PatternKind::Helical => "P2",
            PatternKind::ZigZag => "P3",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Linear => "linear",
            PatternKind::Helical => "helical",
            PatternKind::ZigZag => "zigzag",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "p1" => Ok(PatternKind::Linear),
            "helical" | "helix" | "p2" => Ok(PatternKind::Helical),
            "zigzag" | "zig-zag" | "p3" => Ok(PatternKind::ZigZag),
            other => Err(format!("unknown pattern kind `{other}`")),
        }
    }
}

/// What to do with a zig-zag request whose input frequency is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroFrequency {
    #[default]
    Reject,
    /// Treat it as the helical pattern with the same feed and angular speed.
    AsHelical,
}

/// A coring pattern: motion class plus the decision vector `(v, ω_r, f_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPattern", into = "RawPattern")]
pub struct PatternSpec {
    kind: PatternKind,
    v: f64,
    omega: f64,
    freq: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPattern {
    kind: PatternKind,
    v_mm_s: f64,
    #[serde(default)]
    omega_rad_s: f64,
    #[serde(default)]
    f_r_hz: f64,
}

impl TryFrom<RawPattern> for PatternSpec {
    type Error = KinematicsError;

    fn try_from(raw: RawPattern) -> Result<Self> {
        PatternSpec::new(raw.kind, raw.v_mm_s, raw.omega_rad_s, raw.f_r_hz)
    }
}

impl From<PatternSpec> for RawPattern {
    fn from(p: PatternSpec) -> Self {
        RawPattern {
            kind: p.kind,
            v_mm_s: p.v,
            omega_rad_s: p.omega,
            f_r_hz: p.freq,
        }
    }
}

impl PatternSpec {
    pub fn new(kind: PatternKind, v: f64, omega: f64, freq: f64) -> Result<Self> {
        Self::with_policy(kind, v, omega, freq, ZeroFrequency::Reject)
    }

    pub fn with_policy(
        kind: PatternKind,
        v: f64,
        omega: f64,
        freq: f64,
        zero_frequency: ZeroFrequency,
    ) -> Result<Self> {
        for (name, value) in [("v", v), ("omega_r", omega), ("f_r", freq)] {
            if !value.is_finite() {
                return Err(KinematicsError::NonFinite(name));
            }
        }
        if v <= 0.0 {
            return Err(KinematicsError::NonPositiveFeed(v));
        }
        if omega < 0.0 {
            return Err(KinematicsError::Negative {
                name: "omega_r",
                value: omega,
            });
        }
        if freq < 0.0 {
            return Err(KinematicsError::Negative {
                name: "f_r",
                value: freq,
            });
        }
        let kind = match kind {
            PatternKind::ZigZag if freq == 0.0 => match zero_frequency {
                ZeroFrequency::Reject => return Err(KinematicsError::DegenerateZigZag),
                ZeroFrequency::AsHelical => PatternKind::Helical,
            },
            k => k,
        };
        let requirement = match kind {
            PatternKind::Linear if omega != 0.0 || freq != 0.0 => Some("omega_r = 0 and f_r = 0"),
            PatternKind::Helical if omega <= 0.0 || freq != 0.0 => Some("omega_r > 0 and f_r = 0"),
            PatternKind::ZigZag if omega <= 0.0 => Some("omega_r > 0 and f_r > 0"),
            _ => None,
        };
        if let Some(requirement) = requirement {
            return Err(KinematicsError::Inconsistent { kind, requirement });
        }
        Ok(Self {
            kind,
            v,
            omega,
            freq,
        })
    }

    pub fn linear(v: f64) -> Result<Self> {
        Self::new(PatternKind::Linear, v, 0.0, 0.0)
    }

    pub fn helical(v: f64, omega: f64) -> Result<Self> {
        Self::new(PatternKind::Helical, v, omega, 0.0)
    }

    pub fn zigzag(v: f64, omega: f64, freq: f64) -> Result<Self> {
        Self::new(PatternKind::ZigZag, v, omega, freq)
    }

    /// Infers the pattern class from a decision vector: `ω = 0` is linear,
    /// `f = 0` is helical, anything else zig-zag.
    pub fn from_decision(v: f64, omega: f64, freq: f64) -> Result<Self> {
        let kind = if omega == 0.0 {
            PatternKind::Linear
        } else if freq == 0.0 {
            PatternKind::Helical
        } else {
            PatternKind::ZigZag
        };
        Self::new(kind, v, omega, freq)
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// Feed rate, mm/s.
    pub fn feed(&self) -> f64 {
        self.v
    }

    /// Angular speed, rad/s.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Direction-change input frequency, Hz.
    pub fn frequency(&self) -> f64 {
        self.freq
    }

    /// Checks the motor limits of the desk-scale platform.
    pub fn check_platform(&self) -> Result<()> {
        for (quantity, value, limit) in [
            ("v", self.v, PLATFORM_MAX_FEED),
            ("omega_r", self.omega, PLATFORM_MAX_OMEGA),
            ("f_r", self.freq, PLATFORM_MAX_FREQUENCY),
        ] {
            if value > limit {
                return Err(KinematicsError::PlatformLimit {
                    quantity,
                    value,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Rim angle at time `t`, rad.
    pub fn angle(&self, t: f64) -> f64 {
        match self.kind {
            PatternKind::Linear => 0.0,
            PatternKind::Helical => self.omega * t,
            PatternKind::ZigZag => {
                ZIGZAG_GAIN * self.omega * (ZIGZAG_TIME_SCALE * self.freq * t).sin().abs()
                    / self.freq
            }
        }
    }

    /// Signed angular rate `dθ/dt` at time `t` (right derivative at reversals).
    pub fn angular_rate(&self, t: f64) -> f64 {
        match self.kind {
            PatternKind::Linear => 0.0,
            PatternKind::Helical => self.omega,
            PatternKind::ZigZag => {
                let phase = ZIGZAG_TIME_SCALE * self.freq * t;
                let sign = if phase.sin() < 0.0 { -1.0 } else { 1.0 };
                sign * self.omega * phase.cos()
            }
        }
    }

    /// Duration between consecutive rotation reversals of the zig-zag pattern.
    pub fn reversal_period(&self) -> Option<f64> {
        match self.kind {
            PatternKind::ZigZag => Some(PI / (ZIGZAG_TIME_SCALE * self.freq)),
            _ => None,
        }
    }

    /// Deterministic order: kind, then v, ω_r, f_r.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then(self.v.total_cmp(&other.v))
            .then(self.omega.total_cmp(&other.omega))
            .then(self.freq.total_cmp(&other.freq))
    }

    /// Same decision vector and class (exact comparison).
    pub fn same_key(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}

impl fmt::Display for PatternSpec {
    /// `P3:38/12/30` style label.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}/{}/{}",
            self.kind.code(),
            trim_number(self.v),
            trim_number(self.omega),
            trim_number(self.freq)
        )
    }
}

fn trim_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Core liner dimensions, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct CoreGeometry {
    outer_diameter: f64,
    inner_diameter: f64,
    wall_thickness: f64,
    liner_length: f64,
    kinematic_radius: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    outer_diameter_mm: f64,
    inner_diameter_mm: f64,
    wall_thickness_mm: f64,
    liner_length_mm: f64,
    kinematic_radius_mm: f64,
}

impl TryFrom<RawGeometry> for CoreGeometry {
    type Error = KinematicsError;

    fn try_from(g: RawGeometry) -> Result<Self> {
        CoreGeometry::new(
            g.outer_diameter_mm,
            g.inner_diameter_mm,
            g.wall_thickness_mm,
            g.liner_length_mm,
            g.kinematic_radius_mm,
        )
    }
}

impl From<CoreGeometry> for RawGeometry {
    fn from(g: CoreGeometry) -> Self {
        RawGeometry {
            outer_diameter_mm: g.outer_diameter,
            inner_diameter_mm: g.inner_diameter,
            wall_thickness_mm: g.wall_thickness,
            liner_length_mm: g.liner_length,
            kinematic_radius_mm: g.kinematic_radius,
        }
    }
}

impl Default for CoreGeometry {
    /// 2-inch PVC liner: 50.8 mm OD, 47.8 mm ID, 304.8 mm long. The
    /// kinematic radius is the outer radius.
    fn default() -> Self {
        Self {
            outer_diameter: 50.8,
            inner_diameter: 47.8,
            wall_thickness: 1.5,
            liner_length: 304.8,
            kinematic_radius: 25.4,
        }
    }
}

impl CoreGeometry {
    pub fn new(
        outer_diameter: f64,
        inner_diameter: f64,
        wall_thickness: f64,
        liner_length: f64,
        kinematic_radius: f64,
    ) -> Result<Self> {
        let fields = [
            ("outer_diameter", outer_diameter),
            ("inner_diameter", inner_diameter),
            ("wall_thickness", wall_thickness),
            ("liner_length", liner_length),
            ("kinematic_radius", kinematic_radius),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(KinematicsError::NonFinite(name));
            }
            if value <= 0.0 {
                return Err(KinematicsError::Geometry(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        let expected = inner_diameter + 2.0 * wall_thickness;
        if (outer_diameter - expected).abs() > 1e-9 * outer_diameter.max(1.0) {
            return Err(KinematicsError::Geometry(format!(
                "outer diameter {outer_diameter} != inner {inner_diameter} + 2 x wall {wall_thickness}"
            )));
        }
        if kinematic_radius > outer_diameter / 2.0 + 1e-12 {
            return Err(KinematicsError::Geometry(format!(
                "kinematic radius {kinematic_radius} exceeds outer radius {}",
                outer_diameter / 2.0
            )));
        }
        Ok(Self {
            outer_diameter,
            inner_diameter,
            wall_thickness,
            liner_length,
            kinematic_radius,
        })
    }

    /// Default liner with a different kinematic radius.
    pub fn with_kinematic_radius(self, r: f64) -> Result<Self> {
        Self::new(
            self.outer_diameter,
            self.inner_diameter,
            self.wall_thickness,
            self.liner_length,
            r,
        )
    }

    pub fn outer_diameter(&self) -> f64 {
        self.outer_diameter
    }

    pub fn inner_diameter(&self) -> f64 {
        self.inner_diameter
    }

    pub fn wall_thickness(&self) -> f64 {
        self.wall_thickness
    }

    pub fn liner_length(&self) -> f64 {
        self.liner_length
    }

    pub fn kinematic_radius(&self) -> f64 {
        self.kinematic_radius
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_diameter / 2.0
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_diameter / 2.0
    }

    /// Cross-section of the liner wall, mm².
    pub fn annulus_area(&self) -> f64 {
        PI / 4.0 * (self.outer_diameter.powi(2) - self.inner_diameter.powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta: f64,
}

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(KinematicsError::NonFinite(name));
    }
    if t < 0.0 {
        return Err(KinematicsError::Negative { name, value: t });
    }
    Ok(())
}

pub fn position_at(pattern: &PatternSpec, geom: &CoreGeometry, t: f64) -> Result<TrajectoryPoint> {
    check_time("t", t)?;
    let r = geom.kinematic_radius();
    let theta = pattern.angle(t);
    Ok(TrajectoryPoint {
        t,
        x: r * theta.sin(),
        y: r * theta.cos(),
        z: -pattern.feed() * t,
        theta,
    })
}

/// Samples the trajectory at `0, dt, 2dt, …` and always at `duration`.
pub fn trajectory(
    pattern: &PatternSpec,
    geom: &CoreGeometry,
    duration: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    check_time("duration", duration)?;
    check_time("dt", dt)?;
    if duration <= 0.0 || dt <= 0.0 || dt > duration {
        return Err(KinematicsError::Sampling(format!(
            "need 0 < dt <= duration, got dt={dt}, duration={duration}"
        )));
    }
    let steps = (duration / dt).floor() as u64;
    let mut points = Vec::with_capacity(steps as usize + 2);
    for k in 0..=steps {
        let t = k as f64 * dt;
        if t > duration {
            break;
        }
        points.push(position_at(pattern, geom, t)?);
    }
    let last = points.last().map(|p| p.t).unwrap_or(0.0);
    if duration - last > 1e-9 * dt {
        points.push(position_at(pattern, geom, duration)?);
    } else if let Some(p) = points.last_mut() {
        *p = position_at(pattern, geom, duration)?;
    }
    Ok(points)
}

/// Instantaneous speed of the rim point, mm/s.
pub fn rim_speed(pattern: &PatternSpec, geom: &CoreGeometry, t: f64) -> f64 {
    let tangential = geom.kinematic_radius() * pattern.angular_rate(t);
    pattern.feed().hypot(tangential)
}

/// Arc length of the rim point's path over `[0, duration]`, mm.
pub fn path_length(pattern: &PatternSpec, geom: &CoreGeometry, duration: f64) -> Result<f64> {
    check_time("duration", duration)?;
    Ok(arc_length_to(pattern, geom, duration))
}

/// Arc length over `[t0, t1]`.
pub fn path_length_between(
    pattern: &PatternSpec,
    geom: &CoreGeometry,
    t0: f64,
    t1: f64,
) -> Result<f64> {
    check_time("t0", t0)?;
    check_time("t1", t1)?;
    if t1 < t0 {
        return Err(KinematicsError::Sampling(format!("t1={t1} < t0={t0}")));
    }
    Ok(arc_length_to(pattern, geom, t1) - arc_length_to(pattern, geom, t0))
}

fn arc_length_to(pattern: &PatternSpec, geom: &CoreGeometry, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    match pattern.kind() {
        PatternKind::Linear | PatternKind::Helical => rim_speed(pattern, geom, 0.0) * t,
        PatternKind::ZigZag => {
            // The speed is smooth between reversals and identical on every
            // half period, so integrate one half period and the remainder.
            let half = pattern.reversal_period().expect("zig-zag has a period");
            let v = pattern.feed();
            let a = geom.kinematic_radius() * pattern.omega();
            let k = ZIGZAG_TIME_SCALE * pattern.frequency();
            let speed = |s: f64| v.hypot(a * (k * s).cos());
            let full = (t / half).floor();
            let rem = t - full * half;
            let per_half = if full > 0.0 {
                gl16().integrate_composite(0.0, half, 8, speed)
            } else {
                0.0
            };
            let tail = if rem > 0.0 {
                gl16().integrate_composite(0.0, rem, 8, speed)
            } else {
                0.0
            };
            full * per_half + tail
        }
    }
}

/// Number of rotation reversals in `(0, duration]`.
pub fn direction_changes(pattern: &PatternSpec, duration: f64) -> Result<u64> {
    check_time("duration", duration)?;
    if duration <= 0.0 {
        return Err(KinematicsError::Sampling(
            "duration must be positive".into(),
        ));
    }
    match pattern.kind() {
        PatternKind::Linear | PatternKind::Helical => Ok(0),
        PatternKind::ZigZag => {
            let cycles = duration * ZIGZAG_TIME_SCALE * pattern.frequency() / PI;
            // Absorb round-off when duration lands on a reversal.
            Ok((cycles * (1.0 + 4.0 * f64::EPSILON)).floor() as u64)
        }
    }
}
