//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::CoreGeometry;
use crate::objectives::NormalizationScope;
use crate::optimizer::{WeightConfig, DEFAULT_TIE_TOLERANCE};
use crate::penetration::{
    ForceProfile, MotorParams, SedimentSpec, TrialConfig, DEFAULT_CURRENT_LIMIT,
    DEFAULT_TARGET_DEPTH,
};
use crate::stats::DEFAULT_ALPHA;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: CoreGeometry,
    /// L_d, mm.
    pub target_depth: f64,
    /// C_max, A.
    pub current_limit: f64,
    /// Simulator step, s.
    pub dt: f64,
    pub normalization_scope: NormalizationScope,
    pub weight_grid: Vec<WeightConfig>,
    pub tie_tolerance: f64,
    pub alpha: f64,
    pub seed: u64,
    pub replicates: usize,
    pub sediments: Vec<SedimentSpec>,
    pub output_dir: PathBuf,
    pub external_force: ForceProfile,
    /// W_b, N.
    pub buoyant_weight: f64,
    pub motors: MotorParams,
    pub mass_noise: f64,
    /// Also write one time-series CSV per simulated trial.
    pub write_timeseries: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let trial = TrialConfig::default();
        Self {
            geometry: CoreGeometry::default(),
            target_depth: DEFAULT_TARGET_DEPTH,
            current_limit: DEFAULT_CURRENT_LIMIT,
            dt: trial.dt,
            normalization_scope: NormalizationScope::default(),
            weight_grid: WeightConfig::default_grid(),
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            alpha: DEFAULT_ALPHA,
            seed: 2021,
            replicates: 3,
            sediments: SedimentSpec::presets(),
            output_dir: PathBuf::from("out"),
            external_force: trial.external_force,
            buoyant_weight: trial.buoyant_weight,
            motors: trial.motors,
            mass_noise: trial.mass_noise,
            write_timeseries: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }

    /// Default configuration, or the file at `path` when given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn trial_config(&self) -> TrialConfig {
        let mut motors = self.motors;
        motors.current_limit = self.current_limit;
        TrialConfig {
            target_depth: self.target_depth,
            dt: self.dt,
            external_force: self.external_force,
            buoyant_weight: self.buoyant_weight,
            motors,
            seed: self.seed,
            mass_noise: self.mass_noise,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.current_limit.is_finite() && self.current_limit > 0.0) {
            return bad(format!(
                "current_limit must be positive, got {}",
                self.current_limit
            ));
        }
        if !(self.tie_tolerance.is_finite() && self.tie_tolerance >= 0.0) {
            return bad(format!(
                "tie_tolerance must be >= 0, got {}",
                self.tie_tolerance
            ));
        }
        if self.weight_grid.is_empty() {
            return bad("weight_grid is empty".into());
        }
        if self.replicates < 2 {
            return bad("replicates must be >= 2 for the variance tests".into());
        }
        for s in &self.sediments {
            s.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        self.trial_config()
            .validate(&self.geometry)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
