//! Weighted-sum selection of coring patterns.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::PatternSpec;
use crate::objectives::{ObjectiveRow, ObjectiveTable};
use crate::penetration::DEFAULT_CURRENT_LIMIT;

/// Absorbs the two-decimal rounding of published objective values.
pub const DEFAULT_TIE_TOLERANCE: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("weights must be non-negative and sum to 1, got ({0}, {1})")]
    InvalidWeights(f64, f64),
    #[error("row {0} is excluded and has no objective values")]
    ExcludedRow(String),
    #[error("no feasible, non-excluded row to choose from")]
    NoSolution,
    #[error("weight grid is empty")]
    EmptyGrid,
    #[error("tie tolerance must be finite and >= 0, got {0}")]
    InvalidTolerance(f64),
}

pub type Result<T, E = OptimizeError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct WeightConfig {
    w1: f64,
    w2: f64,
}

impl TryFrom<(f64, f64)> for WeightConfig {
    type Error = OptimizeError;

    fn try_from((w1, w2): (f64, f64)) -> Result<Self> {
        WeightConfig::new(w1, w2)
    }
}

impl From<WeightConfig> for (f64, f64) {
    fn from(w: WeightConfig) -> Self {
        (w.w1, w.w2)
    }
}

impl WeightConfig {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        let ok = w1.is_finite()
            && w2.is_finite()
            && w1 >= 0.0
            && w2 >= 0.0
            && (w1 + w2 - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Self { w1, w2 })
        } else {
            Err(OptimizeError::InvalidWeights(w1, w2))
        }
    }

    /// `(w1, 1 − w1)`.
    pub fn from_w1(w1: f64) -> Result<Self> {
        Self::new(w1, 1.0 - w1)
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    /// `w1 = 0.1, 0.2, …, 0.9`.
    pub fn default_grid() -> Vec<Self> {
        (1..=9)
            .map(|k| Self::from_w1(k as f64 / 10.0).expect("grid weights are valid"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub weights: WeightConfig,
    pub chosen: PatternSpec,
    pub f1: f64,
    pub f2: f64,
    /// `w1·f1 + w2·f2` of the chosen row.
    pub value: f64,
    /// Other rows within the tie tolerance of the best value.
    pub ties: Vec<PatternSpec>,
}

pub fn weighted_sum_value(row: &ObjectiveRow, w: &WeightConfig) -> Result<f64> {
    let (f1, f2) = row
        .normalized()
        .ok_or_else(|| OptimizeError::ExcludedRow(row.pattern.to_string()))?;
    Ok(w.w1 * f1 + w.w2 * f2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintStatus {
    /// Current logs show both motors stayed within the limit.
    Verified,
    /// No current log; the row is kept on trust.
    UnverifiedConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    CurrentLimit { peak_c1: f64, peak_c2: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub kept: Vec<(ObjectiveRow, ConstraintStatus)>,
    pub removed: Vec<(ObjectiveRow, RemovalReason)>,
}

/// Drops rows whose trials drew more than `c_max` on either motor.
pub fn feasibility_filter(rows: &[ObjectiveRow], c_max: f64) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    for row in rows {
        match row.currents {
            None => report
                .kept
                .push((row.clone(), ConstraintStatus::UnverifiedConstraint)),
            Some(log) if log.limit_hit || log.peak_c1 > c_max || log.peak_c2 > c_max => {
                report.removed.push((
                    row.clone(),
                    RemovalReason::CurrentLimit {
                        peak_c1: log.peak_c1,
                        peak_c2: log.peak_c2,
                    },
                ))
            }
            Some(_) => report.kept.push((row.clone(), ConstraintStatus::Verified)),
        }
    }
    report
}

/// Minimises the weighted sum over feasible, non-excluded rows.
///
/// Rows within `tie_tol` of the minimum are ties; among them the row with the
/// lower `f1` wins, then the lower pattern key.
pub fn select_optimal(
    table: &ObjectiveTable,
    w: &WeightConfig,
    tie_tol: f64,
) -> Result<SelectionResult> {
    if !tie_tol.is_finite() || tie_tol < 0.0 {
        return Err(OptimizeError::InvalidTolerance(tie_tol));
    }
    let c_max = table.current_limit.unwrap_or(DEFAULT_CURRENT_LIMIT);
    let feasible = feasibility_filter(&table.rows, c_max);
    let scored: Vec<(&ObjectiveRow, f64)> = feasible
        .kept
        .iter()
        .filter(|(row, _)| row.normalized().is_some())
        .map(|(row, _)| (row, weighted_sum_value(row, w).expect("row is usable")))
        .collect();
    let best = scored.iter().map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(OptimizeError::NoSolution);
    }
    let mut candidates: Vec<(&ObjectiveRow, f64)> = scored
        .into_iter()
        .filter(|(_, f)| *f - best <= tie_tol)
        .collect();
    candidates.sort_by(|(a, _), (b, _)| tie_break(a, b));
    let (chosen, value) = candidates[0];
    let (f1, f2) = chosen.normalized().expect("row is usable");
    Ok(SelectionResult {
        weights: *w,
        chosen: chosen.pattern,
        f1,
        f2,
        value,
        ties: candidates[1..].iter().map(|(r, _)| r.pattern).collect(),
    })
}

fn tie_break(a: &ObjectiveRow, b: &ObjectiveRow) -> Ordering {
    let fa = a.f1_norm.unwrap_or(f64::INFINITY);
    let fb = b.f1_norm.unwrap_or(f64::INFINITY);
    fa.total_cmp(&fb).then(a.pattern.cmp_key(&b.pattern))
}

pub fn sweep_weights(
    table: &ObjectiveTable,
    grid: &[WeightConfig],
    tie_tol: f64,
) -> Result<Vec<SelectionResult>> {
    if grid.is_empty() {
        return Err(OptimizeError::EmptyGrid);
    }
    grid.iter()
        .map(|w| select_optimal(table, w, tie_tol))
        .collect()
}

/// `a` dominates `b`: no worse in both objectives and better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Non-dominated rows, sorted by `f1` ascending (then `f2`, then pattern).
/// Rows with identical objective pairs are all kept.
pub fn pareto_front(table: &ObjectiveTable) -> Vec<ObjectiveRow> {
    let mut rows: Vec<(&ObjectiveRow, (f64, f64))> = table
        .rows
        .iter()
        .filter_map(|r| r.normalized().map(|p| (r, p)))
        .collect();
    rows.sort_by(|(ra, a), (rb, b)| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(ra.pattern.cmp_key(&rb.pattern))
    });

    // Sweep groups of equal f1: a group's best f2 survives only if every
    // group with smaller f1 had a strictly larger best f2.
    let mut front = Vec::new();
    let mut best_prev = f64::INFINITY;
    let mut i = 0;
    while i < rows.len() {
        let f1 = rows[i].1 .0;
        let mut j = i;
        while j < rows.len() && rows[j].1 .0 == f1 {
            j += 1;
        }
        let group_min = rows[i].1 .1;
        if group_min < best_prev {
            front.extend(
                rows[i..j]
                    .iter()
                    .filter(|(_, p)| p.1 == group_min)
                    .map(|(r, _)| (*r).clone()),
            );
            best_prev = group_min;
        }
        i = j;
    }
    front
}
