//! The two-step experiment protocol on the simulator.
//!
//! Step 1 runs the 4 × 5 feed/rotation grid in randomized order, tests both
//! motor factors with a two-way ANOVA on recovered mass, and keeps the
//! best-mass pattern plus every pattern Tukey HSD cannot separate from it.
//! Step 2 adds zig-zag variants of the kept rotating patterns. All trials then
//! feed one objective table, a weight sweep and a Pareto front.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::RunConfig;
use crate::io;
use crate::kinematics::{PatternKind, PatternSpec};
use crate::objectives::{build_table, ObjectiveError, ObjectiveRow, ObjectiveTable, TableSpec};
use crate::optimizer::{pareto_front, sweep_weights, OptimizeError, SelectionResult};
use crate::penetration::{simulate_trial, SedimentSpec, SimError, TrialRecord};
use crate::plot::{self, PlotError};
use crate::stats::{
    multiple_comparison, srs_order, step1_grid, step2_grid, two_way_anova, AnovaResult,
    ComparisonOutcome, Preference, StatsError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Kinematics(#[from] crate::kinematics::KinematicsError),
    #[error("{0}")]
    Design(String),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// How trials are arranged into a two-factor layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    /// Factor A = feed, factor B = rotation rate, over non-zig-zag trials.
    FeedByRotation,
    /// Factor A = (feed, rotation) pair, factor B = zig-zag frequency.
    PairByFrequency,
}

/// Replicate masses arranged into the a × b × n grid of `design`. Levels
/// are sorted ascending.
pub fn anova_cells(trials: &[TrialRecord], design: Design) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut map: BTreeMap<(Key, Key), Vec<f64>> = BTreeMap::new();
    for t in trials {
        let p = &t.pattern;
        let key = match design {
            Design::FeedByRotation => {
                if p.kind() == PatternKind::ZigZag {
                    continue;
                }
                (Key(p.feed(), 0.0), Key(p.omega(), 0.0))
            }
            Design::PairByFrequency => {
                if p.kind() == PatternKind::Linear {
                    continue;
                }
                (Key(p.feed(), p.omega()), Key(p.frequency(), 0.0))
            }
        };
        map.entry(key).or_default().push(t.mass_g);
    }
    let mut a_levels: Vec<Key> = map.keys().map(|k| k.0).collect();
    let mut b_levels: Vec<Key> = map.keys().map(|k| k.1).collect();
    a_levels.dedup();
    b_levels.sort();
    b_levels.dedup();
    let mut cells = Vec::with_capacity(a_levels.len());
    for a in &a_levels {
        let mut row = Vec::with_capacity(b_levels.len());
        for b in &b_levels {
            let cell = map.get(&(*a, *b)).ok_or_else(|| {
                PipelineError::Design(format!(
                    "incomplete design: no trials at level ({}, {}) × {}",
                    a.0, a.1, b.0
                ))
            })?;
            row.push(cell.clone());
        }
        cells.push(row);
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.total_cmp(&other.1))
    }
}

/// Replicate masses per pattern, in pattern order.
pub fn mass_groups(trials: &[TrialRecord]) -> Vec<(PatternSpec, Vec<f64>)> {
    let mut groups: Vec<(PatternSpec, Vec<f64>)> = Vec::new();
    for t in trials {
        match groups.iter_mut().find(|(p, _)| p.same_key(&t.pattern)) {
            Some((_, v)) => v.push(t.mass_g),
            None => groups.push((t.pattern, vec![t.mass_g])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp_key(&b.0));
    groups
}

#[derive(Debug, Clone)]
pub struct SedimentRun {
    pub sediment: SedimentSpec,
    pub step1: Vec<TrialRecord>,
    pub step1_anova: AnovaResult,
    pub comparison: ComparisonOutcome,
    pub step2: Vec<TrialRecord>,
    /// Needs at least two selected rotating patterns.
    pub step2_anova: Option<AnovaResult>,
    pub table: ObjectiveTable,
    pub sweep: Vec<SelectionResult>,
    pub front: Vec<ObjectiveRow>,
}

impl SedimentRun {
    pub fn trials(&self) -> impl Iterator<Item = &TrialRecord> {
        self.step1.iter().chain(&self.step2)
    }
}

fn run_in_order(
    patterns: &[PatternSpec],
    replicates: usize,
    first_id: u64,
    seed: u64,
    sediment: &SedimentSpec,
    cfg: &RunConfig,
) -> Result<Vec<TrialRecord>> {
    let runs: Vec<PatternSpec> = patterns
        .iter()
        .flat_map(|p| std::iter::repeat_n(*p, replicates))
        .collect();
    let trial_cfg = cfg.trial_config();
    srs_order(runs.len(), seed)
        .into_iter()
        .enumerate()
        .map(|(i, idx)| {
            simulate_trial(
                first_id + i as u64,
                &runs[idx],
                sediment,
                &cfg.geometry,
                &trial_cfg,
            )
            .map_err(PipelineError::from)
        })
        .collect()
}

pub fn run_sediment(sediment: &SedimentSpec, cfg: &RunConfig) -> Result<SedimentRun> {
    let step1_patterns = step1_grid();
    let step1 = run_in_order(&step1_patterns, cfg.replicates, 1, cfg.seed, sediment, cfg)?;
    let step1_anova = two_way_anova(&anova_cells(&step1, Design::FeedByRotation)?)?;
    let comparison = multiple_comparison(&mass_groups(&step1), cfg.alpha, Preference::Higher)?;

    let mut step2_patterns = Vec::new();
    for base in comparison
        .selected
        .iter()
        .filter(|p| p.kind() == PatternKind::Helical)
    {
        step2_patterns.extend(
            step2_grid(base)?
                .into_iter()
                .filter(|p| p.kind() == PatternKind::ZigZag),
        );
    }
    let step2 = if step2_patterns.is_empty() {
        Vec::new()
    } else {
        run_in_order(
            &step2_patterns,
            cfg.replicates,
            step1.len() as u64 + 1,
            cfg.seed.wrapping_add(1),
            sediment,
            cfg,
        )?
    };

    let all: Vec<TrialRecord> = step1.iter().chain(&step2).cloned().collect();
    let step2_anova = if step2_patterns.len() >= 6 {
        let helical: Vec<TrialRecord> = all
            .iter()
            .filter(|t| {
                comparison.selected.iter().any(|s| {
                    s.kind() == PatternKind::Helical
                        && s.feed() == t.pattern.feed()
                        && s.omega() == t.pattern.omega()
                })
            })
            .cloned()
            .collect();
        Some(two_way_anova(&anova_cells(
            &helical,
            Design::PairByFrequency,
        )?)?)
    } else {
        None
    };

    let spec = TableSpec {
        geometry: cfg.geometry,
        target_depth: cfg.target_depth,
        scope: cfg.normalization_scope,
    };
    let table = build_table(&all, &spec)?.with_current_limit(cfg.current_limit);
    let sweep = sweep_weights(&table, &cfg.weight_grid, cfg.tie_tolerance)?;
    let front = pareto_front(&table);
    Ok(SedimentRun {
        sediment: sediment.clone(),
        step1,
        step1_anova,
        comparison,
        step2,
        step2_anova,
        table,
        sweep,
        front,
    })
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<SedimentRun>> {
    cfg.sediments.iter().map(|s| run_sediment(s, cfg)).collect()
}

/// File name and contents of every output of a protocol run.
pub fn bundle(runs: &[SedimentRun], cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    if runs.is_empty() {
        return Err(PipelineError::Design("no sediments configured".into()));
    }
    let mut files = Vec::new();
    let mut series = Vec::new();
    for run in runs {
        let name = &run.sediment.name;
        let trials: Vec<TrialRecord> = run.trials().cloned().collect();
        files.push((format!("{name}_summary.csv"), io::summary_csv(&trials)));
        files.push((
            format!("{name}_anova_step1.csv"),
            io::anova_csv(&run.step1_anova),
        ));
        if let Some(a) = &run.step2_anova {
            files.push((format!("{name}_anova_step2.csv"), io::anova_csv(a)));
        }
        files.push((
            format!("{name}_comparison.csv"),
            io::comparison_csv(&run.comparison),
        ));
        files.push((
            format!("{name}_objectives.csv"),
            io::objectives_csv(&run.table),
        ));
        files.push((format!("{name}_sweep.csv"), io::sweep_csv(&run.sweep)));
        files.push((format!("{name}_pareto.csv"), io::pareto_csv(&run.front)));
        files.push((format!("{name}_pareto.svg"), plot::pareto_svg(&run.table)?));
        if cfg.write_timeseries {
            for t in &trials {
                files.push((
                    format!("{name}_timeseries/{}.csv", t.trial_id),
                    io::timeseries_csv(&t.samples),
                ));
            }
        }
        series.push((name.clone(), run.sweep.clone()));
    }
    files.push(("sweep.svg".into(), plot::sweep_svg(&series)?));
    Ok(files)
}
