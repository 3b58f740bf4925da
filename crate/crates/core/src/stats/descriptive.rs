use serde::Serialize;

use super::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// Set when a single trial leaves the standard deviation undefined.
    pub std_undefined: bool,
}

/// Sample mean and (n − 1) standard deviation.
pub fn mass_summary(values: &[f64]) -> Result<MassSummary> {
    if values.is_empty() {
        return Err(StatsError::Design(
            "mass summary needs at least one trial".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(MassSummary {
            n,
            mean,
            std_dev: 0.0,
            std_undefined: true,
        });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MassSummary {
        n,
        mean,
        std_dev: var.sqrt(),
        std_undefined: false,
    })
}

/// Relative change in percent.
pub fn percent_change(baseline: f64, new: f64) -> Result<f64> {
    if !baseline.is_finite() || !new.is_finite() {
        return Err(StatsError::NonFinite);
    }
    if baseline <= 0.0 {
        return Err(StatsError::Domain(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok(100.0 * (new - baseline) / baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryRatio {
    pub value: f64,
    /// Core longer than the penetration depth, usually a measurement error.
    pub exceeds_one: bool,
}

/// Core length over penetration depth.
pub fn recovery_ratio(core_length: f64, depth: f64) -> Result<RecoveryRatio> {
    if !core_length.is_finite() || !depth.is_finite() {
        return Err(StatsError::NonFinite);
    }
    if depth <= 0.0 {
        return Err(StatsError::Domain(format!(
            "penetration depth must be positive, got {depth}"
        )));
    }
    if core_length < 0.0 {
        return Err(StatsError::Domain(format!(
            "core length must be >= 0, got {core_length}"
        )));
    }
    let value = core_length / depth;
    Ok(RecoveryRatio {
        value,
        exceeds_one: value > 1.0,
    })
}
