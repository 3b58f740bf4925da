//! Two-way ANOVA, Tukey HSD down-selection, randomized run ordering and
//! descriptive summaries.

mod anova;
mod descriptive;
mod design;
mod distributions;
mod tukey;

use thiserror::Error;

pub use anova::{two_way_anova, AnovaLine, AnovaResult};
pub use descriptive::{mass_summary, percent_change, recovery_ratio, MassSummary, RecoveryRatio};
pub use design::{srs_order, step1_grid, step2_grid, STEP1_FEEDS, STEP1_OMEGAS, STEP2_FREQUENCIES};
pub use distributions::{
    f_survival, normal_cdf, studentized_range_cdf, studentized_range_survival,
};
pub use tukey::{multiple_comparison, ComparisonOutcome, PairComparison, Preference};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("invalid design: {0}")]
    Design(String),
    #[error("non-finite observation")]
    NonFinite,
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
