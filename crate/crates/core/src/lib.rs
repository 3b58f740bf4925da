//! Coring-pattern analysis for a desk-scale sediment sampler.
//!
//! * [`kinematics`]: linear, helical and zig-zag rim trajectories
//! * [`penetration`]: force balance, resistance model and trial simulator
//! * [`objectives`]: mass and power objectives, normalization, tables
//! * [`optimizer`]: weighted-sum selection, weight sweeps, Pareto fronts
//! * [`stats`]: two-way ANOVA, Tukey HSD, run ordering, descriptive helpers
//! * [`io`], [`plot`], [`reproduce`], [`pipeline`]: file formats, SVG output,
//!   published-table reproduction and the end-to-end protocol

pub mod config;
pub mod io;
pub mod kinematics;
pub mod objectives;
pub mod optimizer;
pub mod penetration;
pub mod pipeline;
pub mod plot;
pub mod quadrature;
pub mod reproduce;
pub mod stats;

pub use kinematics::{CoreGeometry, PatternKind, PatternSpec, TrajectoryPoint};
pub use objectives::{NormalizationScope, ObjectiveRow, ObjectiveTable};
pub use optimizer::{SelectionResult, WeightConfig};
pub use penetration::{SedimentSpec, TrialConfig, TrialRecord};
