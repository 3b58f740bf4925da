//! Objective values per coring pattern.
//!
//! `f1 = V_d / m_s` is the reciprocal of the recovered bulk density relative
//! to the desired core volume, and `f2 = t / ∫F_p ds` the reciprocal of the
//! mean sampling power. Both are minimised. Raw values are mapped onto
//! `[1, 10]` by an affine min–max map before they are combined.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{CoreGeometry, PatternSpec};
use crate::penetration::{CurrentLog, TrialRecord};

pub const NORM_LOW: f64 = 1.0;
pub const NORM_HIGH: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("nothing to normalize: no non-excluded values")]
    EmptyNormalization,
    #[error("no trials supplied")]
    NoTrials,
    #[error("trials from several sediments in one table: `{0}` and `{1}`")]
    MixedSediments(String, String),
    #[error("table has no usable rows")]
    NoUsableRows,
    #[error("pattern {0} appears twice with different values")]
    ConflictingDuplicate(String),
    #[error("row for {0} carries no raw objective values; joint normalization impossible")]
    MissingRaw(String),
}

pub type Result<T, E = ObjectiveError> = std::result::Result<T, E>;

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ObjectiveError::NonFinite(name))
    }
}

/// Desired core volume `π·r_inner²·L_d`, cm³.
pub fn desired_volume(geom: &CoreGeometry, target_depth: f64) -> Result<f64> {
    check_finite("L_d", target_depth)?;
    if target_depth <= 0.0 {
        return Err(ObjectiveError::NonPositive {
            name: "L_d",
            value: target_depth,
        });
    }
    let r = geom.inner_radius();
    Ok(PI * r * r * target_depth / 1000.0)
}

/// `V_d / m_s` in cm³/g; `None` when nothing was recovered.
pub fn f1_raw(mass_g: f64, desired_volume: f64) -> Result<Option<f64>> {
    check_finite("m_s", mass_g)?;
    check_finite("V_d", desired_volume)?;
    if desired_volume <= 0.0 {
        return Err(ObjectiveError::NonPositive {
            name: "V_d",
            value: desired_volume,
        });
    }
    if mass_g < 0.0 {
        return Err(ObjectiveError::Negative {
            name: "m_s",
            value: mass_g,
        });
    }
    Ok((mass_g > 0.0).then(|| desired_volume / mass_g))
}

/// `duration / work` in s/(N·mm); `None` when no work was done.
pub fn f2_raw(work: f64, duration: f64) -> Result<Option<f64>> {
    check_finite("work", work)?;
    check_finite("duration", duration)?;
    if duration <= 0.0 {
        return Err(ObjectiveError::NonPositive {
            name: "duration",
            value: duration,
        });
    }
    if work < 0.0 {
        return Err(ObjectiveError::Negative {
            name: "work",
            value: work,
        });
    }
    Ok((work > 0.0).then(|| duration / work))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<Option<f64>>,
    /// All non-excluded inputs were equal and were mapped to the low end.
    pub degenerate: bool,
}

/// Affine min–max map onto `[1, 10]`. `None` entries pass through untouched.
pub fn normalize(values: &[Option<f64>]) -> Result<Normalized> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.iter().flatten() {
        check_finite("objective value", *v)?;
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if lo > hi {
        return Err(ObjectiveError::EmptyNormalization);
    }
    let span = hi - lo;
    let degenerate = span == 0.0;
    let values = values
        .iter()
        .map(|v| {
            v.map(|x| {
                if degenerate {
                    NORM_LOW
                } else if x == hi {
                    NORM_HIGH
                } else {
                    NORM_LOW + (NORM_HIGH - NORM_LOW) * (x - lo) / span
                }
            })
        })
        .collect();
    Ok(Normalized { values, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    /// Each source table keeps its own normalization.
    #[default]
    PerTable,
    /// All rows are renormalized together from raw values.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    /// Computed from trial data.
    #[default]
    Measured,
    /// Normalized values copied from a published table; no raw values.
    Transcribed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveRow {
    pub pattern: PatternSpec,
    pub f1_raw: Option<f64>,
    pub f2_raw: Option<f64>,
    pub f1_norm: Option<f64>,
    pub f2_norm: Option<f64>,
    pub excluded: bool,
    pub n_trials: usize,
    /// Peak currents over the row's trials, when time series were available.
    pub currents: Option<CurrentLog>,
}

impl ObjectiveRow {
    /// Normalized pair, `None` for excluded rows.
    pub fn normalized(&self) -> Option<(f64, f64)> {
        if self.excluded {
            return None;
        }
        Some((self.f1_norm?, self.f2_norm?))
    }

    /// A row with published normalized values only.
    pub fn transcribed(pattern: PatternSpec, f1_norm: f64, f2_norm: f64) -> Self {
        Self {
            pattern,
            f1_raw: None,
            f2_raw: None,
            f1_norm: Some(f1_norm),
            f2_norm: Some(f2_norm),
            excluded: false,
            n_trials: 0,
            currents: None,
        }
    }

    /// A published row whose sample mass was zero.
    pub fn transcribed_excluded(pattern: PatternSpec) -> Self {
        Self {
            pattern,
            f1_raw: None,
            f2_raw: None,
            f1_norm: None,
            f2_norm: None,
            excluded: true,
            n_trials: 0,
            currents: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveTable {
    pub sediment: String,
    pub rows: Vec<ObjectiveRow>,
    pub scope: NormalizationScope,
    pub source: RowSource,
    /// Per-motor current limit applied during selection, A.
    pub current_limit: Option<f64>,
    /// Normalization hit an all-equal objective.
    pub degenerate: bool,
}

impl ObjectiveTable {
    /// Table assembled from already-normalized rows.
    pub fn from_rows(
        sediment: impl Into<String>,
        rows: Vec<ObjectiveRow>,
        source: RowSource,
    ) -> Result<Self> {
        let table = Self {
            sediment: sediment.into(),
            rows,
            scope: NormalizationScope::PerTable,
            source,
            current_limit: None,
            degenerate: false,
        };
        table.check()?;
        Ok(table)
    }

    pub fn with_current_limit(mut self, c_max: f64) -> Self {
        self.current_limit = Some(c_max);
        self
    }

    /// Non-excluded rows.
    pub fn usable(&self) -> impl Iterator<Item = &ObjectiveRow> {
        self.rows.iter().filter(|r| r.normalized().is_some())
    }

    pub fn find(&self, pattern: &PatternSpec) -> Option<&ObjectiveRow> {
        self.rows.iter().find(|r| r.pattern.same_key(pattern))
    }

    fn check(&self) -> Result<()> {
        if self.usable().next().is_none() {
            return Err(ObjectiveError::NoUsableRows);
        }
        let mut keys: Vec<&PatternSpec> = self.rows.iter().map(|r| &r.pattern).collect();
        keys.sort_by(|a, b| a.cmp_key(b));
        if let Some(w) = keys.windows(2).find(|w| w[0].same_key(w[1])) {
            return Err(ObjectiveError::ConflictingDuplicate(w[0].to_string()));
        }
        Ok(())
    }

    /// Merges tables of one sediment. Rows that appear in several tables must
    /// agree; with `Joint` scope every row is renormalized from raw values.
    pub fn union(tables: &[ObjectiveTable], scope: NormalizationScope) -> Result<Self> {
        let first = tables.first().ok_or(ObjectiveError::NoUsableRows)?;
        let mut rows: Vec<ObjectiveRow> = Vec::new();
        let mut source = RowSource::Measured;
        let mut current_limit = None;
        for table in tables {
            if table.sediment != first.sediment {
                return Err(ObjectiveError::MixedSediments(
                    first.sediment.clone(),
                    table.sediment.clone(),
                ));
            }
            if table.source == RowSource::Transcribed {
                source = RowSource::Transcribed;
            }
            current_limit = current_limit.or(table.current_limit);
            for row in &table.rows {
                match rows.iter().find(|r| r.pattern.same_key(&row.pattern)) {
                    Some(existing) if existing.normalized() == row.normalized() => {}
                    Some(_) => {
                        return Err(ObjectiveError::ConflictingDuplicate(
                            row.pattern.to_string(),
                        ))
                    }
                    None => rows.push(row.clone()),
                }
            }
        }
        let mut table = Self {
            sediment: first.sediment.clone(),
            rows,
            scope,
            source,
            current_limit,
            degenerate: tables.iter().any(|t| t.degenerate),
        };
        if scope == NormalizationScope::Joint {
            table.renormalize()?;
        }
        table.check()?;
        Ok(table)
    }

    fn renormalize(&mut self) -> Result<()> {
        for row in &self.rows {
            if !row.excluded && (row.f1_raw.is_none() || row.f2_raw.is_none()) {
                return Err(ObjectiveError::MissingRaw(row.pattern.to_string()));
            }
        }
        let pick = |r: &ObjectiveRow, f: fn(&ObjectiveRow) -> Option<f64>| {
            if r.excluded {
                None
            } else {
                f(r)
            }
        };
        let f1: Vec<Option<f64>> = self.rows.iter().map(|r| pick(r, |r| r.f1_raw)).collect();
        let f2: Vec<Option<f64>> = self.rows.iter().map(|r| pick(r, |r| r.f2_raw)).collect();
        let n1 = normalize(&f1)?;
        let n2 = normalize(&f2)?;
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.f1_norm = n1.values[i];
            row.f2_norm = n2.values[i];
        }
        self.degenerate = n1.degenerate || n2.degenerate;
        Ok(())
    }
}

/// Everything `build_table` needs besides the trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub geometry: CoreGeometry,
    pub target_depth: f64,
    pub scope: NormalizationScope,
}

/// Groups trials by pattern, averages mass, work and duration over the
/// replicates, and normalizes the resulting objectives. Groups with zero
/// mean mass (or no usable work) are excluded and left out of the
/// normalization pool.
pub fn build_table(trials: &[TrialRecord], spec: &TableSpec) -> Result<ObjectiveTable> {
    let first = trials.first().ok_or(ObjectiveError::NoTrials)?;
    if let Some(other) = trials.iter().find(|t| t.sediment != first.sediment) {
        return Err(ObjectiveError::MixedSediments(
            first.sediment.clone(),
            other.sediment.clone(),
        ));
    }
    let volume = desired_volume(&spec.geometry, spec.target_depth)?;

    let mut groups: BTreeMap<PatternKey, Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry(PatternKey(t.pattern)).or_default().push(t);
    }

    let mut rows = Vec::with_capacity(groups.len());
    for (PatternKey(pattern), group) in groups {
        let n = group.len() as f64;
        let mean_mass = group.iter().map(|t| t.mass_g).sum::<f64>() / n;
        let with_work: Vec<&&TrialRecord> = group.iter().filter(|t| !t.no_timeseries).collect();
        let f2 = if with_work.is_empty() {
            None
        } else {
            let m = with_work.len() as f64;
            let mean_work = with_work.iter().map(|t| t.work).sum::<f64>() / m;
            let mean_duration = with_work.iter().map(|t| t.duration).sum::<f64>() / m;
            f2_raw(mean_work, mean_duration)?
        };
        let f1 = f1_raw(mean_mass, volume)?;
        let currents = group
            .iter()
            .filter_map(|t| t.current_log())
            .reduce(CurrentLog::merge);
        rows.push(ObjectiveRow {
            pattern,
            f1_raw: f1,
            f2_raw: f2,
            f1_norm: None,
            f2_norm: None,
            excluded: f1.is_none() || f2.is_none(),
            n_trials: group.len(),
            currents,
        });
    }

    let mut table = ObjectiveTable {
        sediment: first.sediment.clone(),
        rows,
        scope: spec.scope,
        source: RowSource::Measured,
        current_limit: None,
        degenerate: false,
    };
    if !table.rows.iter().any(|r| !r.excluded) {
        return Err(ObjectiveError::NoUsableRows);
    }
    table.renormalize()?;
    Ok(table)
}

/// Orders patterns by `PatternSpec::cmp_key`.
#[derive(Debug, Clone, Copy)]
struct PatternKey(PatternSpec);

impl PartialEq for PatternKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.same_key(&other.0)
    }
}

impl Eq for PatternKey {}

impl PartialOrd for PatternKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PatternKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_key(&other.0)
    }
}
