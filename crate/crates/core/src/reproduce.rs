//! Recomputes the published weighted-sum selections from the transcribed
//! Step 1 and Step 2 tables and diffs them against the published results.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::io::{self, fmt6, IoError};
use crate::kinematics::{PatternKind, PatternSpec};
use crate::objectives::{NormalizationScope, ObjectiveError, ObjectiveRow, ObjectiveTable};
use crate::optimizer::{
    pareto_front, sweep_weights, weighted_sum_value, OptimizeError, SelectionResult, WeightConfig,
};
use crate::plot::{self, PlotError};

pub const SEDIMENTS: [&str; 3] = ["coarse_sand", "medium_sand", "silt"];

/// Allowed gap between a published `F` and `w1·f1 + w2·f2` of its printed
/// objectives, and between a published and a recomputed optimum.
pub const VALUE_TOLERANCE: f64 = 0.01;
/// A selection that differs from the published one is still accepted when
/// the published pattern scores within this of the optimum.
pub const TIE_TOLERANCE: f64 = 0.005;
/// Tie misses tolerated before the run counts as a mismatch.
pub const MAX_TIE_MISSES: usize = 2;

const EMBEDDED: [(&str, &str, &str); 3] = [
    (
        "coarse_sand",
        include_str!("../fixtures/table4_coarse_sand.csv"),
        include_str!("../fixtures/table5_coarse_sand.csv"),
    ),
    (
        "medium_sand",
        include_str!("../fixtures/table4_medium_sand.csv"),
        include_str!("../fixtures/table5_medium_sand.csv"),
    ),
    (
        "silt",
        include_str!("../fixtures/table4_silt.csv"),
        include_str!("../fixtures/table5_silt.csv"),
    ),
];

const REFERENCE: &str = include_str!("../fixtures/table6_reference.csv");

#[derive(Debug, Error)]
pub enum ReproduceError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("missing fixture {0}")]
    MissingFixture(String),
    #[error("fixture for `{expected}` contains rows for `{found}`")]
    WrongSediment { expected: String, found: String },
    #[error("bad reference row: {0}")]
    Reference(String),
}

pub type Result<T> = std::result::Result<T, ReproduceError>;

/// One published selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub sediment: String,
    pub w1: f64,
    pub w2: f64,
    pub f1: f64,
    pub f2: f64,
    pub value: f64,
    pub pattern: PatternSpec,
}

pub fn reference_rows() -> Result<Vec<ReferenceRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(REFERENCE.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ReproduceError::Reference(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ReproduceError::Reference(format!("{rec:?}")))
        };
        let kind: PatternKind = rec
            .get(6)
            .unwrap_or_default()
            .parse()
            .map_err(ReproduceError::Reference)?;
        let pattern = PatternSpec::new(kind, num(7)?, num(8)?, num(9)?)
            .map_err(|e| ReproduceError::Reference(e.to_string()))?;
        out.push(ReferenceRow {
            sediment: rec.get(0).unwrap_or_default().to_string(),
            w1: num(1)?,
            w2: num(2)?,
            f1: num(3)?,
            f2: num(4)?,
            value: num(5)?,
            pattern,
        });
    }
    Ok(out)
}

/// Step 1 and Step 2 tables per sediment.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub sediments: Vec<(String, Vec<ObjectiveTable>)>,
}

impl FixtureSet {
    pub fn embedded() -> Result<Self> {
        let mut sediments = Vec::new();
        for (name, t4, t5) in EMBEDDED {
            let tables = vec![
                load(t4, &format!("table4_{name}.csv"), name)?,
                load(t5, &format!("table5_{name}.csv"), name)?,
            ];
            sediments.push((name.to_string(), tables));
        }
        Ok(Self { sediments })
    }

    /// Reads `table4_<sediment>.csv` and `table5_<sediment>.csv` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut sediments = Vec::new();
        for name in SEDIMENTS {
            let mut tables = Vec::new();
            for step in ["table4", "table5"] {
                let path = dir.join(format!("{step}_{name}.csv"));
                if !path.is_file() {
                    return Err(ReproduceError::MissingFixture(path.display().to_string()));
                }
                let text = std::fs::read_to_string(&path).map_err(|source| IoError::File {
                    path: path.clone(),
                    source,
                })?;
                tables.push(load(&text, &path.display().to_string(), name)?);
            }
            sediments.push((name.to_string(), tables));
        }
        Ok(Self { sediments })
    }

    /// Union of the tables of one sediment, each keeping its own scaling.
    pub fn union(&self, sediment: &str) -> Result<ObjectiveTable> {
        let (_, tables) = self
            .sediments
            .iter()
            .find(|(s, _)| s == sediment)
            .ok_or_else(|| ReproduceError::MissingFixture(sediment.to_string()))?;
        Ok(ObjectiveTable::union(tables, NormalizationScope::PerTable)?)
    }
}

fn load(text: &str, path: &str, sediment: &str) -> Result<ObjectiveTable> {
    let mut tables = io::parse_objectives(text, path)?;
    if tables.len() != 1 || tables[0].sediment != sediment {
        return Err(ReproduceError::WrongSediment {
            expected: sediment.into(),
            found: tables
                .iter()
                .map(|t| t.sediment.as_str())
                .collect::<Vec<_>>()
                .join(","),
        });
    }
    Ok(tables.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffStatus {
    Match,
    /// Different pattern, but the published one ties within tolerance.
    TieMiss,
    Mismatch,
}

impl DiffStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffStatus::Match => "match",
            DiffStatus::TieMiss => "tie_miss",
            DiffStatus::Mismatch => "mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffRow {
    pub reference: ReferenceRow,
    /// `w1·f1 + w2·f2` from the published objectives.
    pub recomputed: f64,
    pub selection: SelectionResult,
    /// Score of the published pattern in the recomputed table, if present.
    pub published_score: Option<f64>,
    pub status: DiffStatus,
}

impl DiffRow {
    /// Published `F` agrees with its own printed objectives.
    pub fn value_ok(&self) -> bool {
        (self.recomputed - self.reference.value).abs() <= VALUE_TOLERANCE
    }
}

#[derive(Debug, Clone)]
pub struct SedimentReport {
    pub sediment: String,
    pub table: ObjectiveTable,
    pub sweep: Vec<SelectionResult>,
    pub front: Vec<ObjectiveRow>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub sediments: Vec<SedimentReport>,
    pub diff: Vec<DiffRow>,
}

impl Report {
    pub fn count(&self, status: DiffStatus) -> usize {
        self.diff.iter().filter(|d| d.status == status).count()
    }

    pub fn passed(&self) -> bool {
        self.count(DiffStatus::Mismatch) == 0 && self.count(DiffStatus::TieMiss) <= MAX_TIE_MISSES
    }

    pub fn front(&self, sediment: &str) -> Option<&[ObjectiveRow]> {
        self.sediments
            .iter()
            .find(|s| s.sediment == sediment)
            .map(|s| s.front.as_slice())
    }

    pub fn diff_csv(&self) -> String {
        let mut out = String::from(
            "sediment,w1,w2,published_pattern,published_F,recomputed_F,selected_pattern,selected_F,published_score,ties,status\n",
        );
        for d in &self.diff {
            let ties: Vec<String> = d.selection.ties.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                d.reference.sediment,
                fmt6(d.reference.w1),
                fmt6(d.reference.w2),
                d.reference.pattern,
                fmt6(d.reference.value),
                fmt6(d.recomputed),
                d.selection.chosen,
                fmt6(d.selection.value),
                d.published_score.map(fmt6).unwrap_or_default(),
                ties.join(";"),
                d.status.as_str()
            );
        }
        out
    }

    /// Human-readable summary, one line per sediment plus the totals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.sediments {
            let members: Vec<String> = s.front.iter().map(|r| r.pattern.to_string()).collect();
            let _ = writeln!(
                out,
                "{}: {} rows, front of {} [{}]",
                s.sediment,
                s.table.usable().count(),
                s.front.len(),
                members.join(", ")
            );
        }
        for d in self.diff.iter().filter(|d| d.status != DiffStatus::Match) {
            let _ = writeln!(
                out,
                "{} w1={:.1}: published {} selected {} ({})",
                d.reference.sediment,
                d.reference.w1,
                d.reference.pattern,
                d.selection.chosen,
                d.status.as_str()
            );
        }
        let _ = writeln!(
            out,
            "{} match, {} tie misses, {} mismatches",
            self.count(DiffStatus::Match),
            self.count(DiffStatus::TieMiss),
            self.count(DiffStatus::Mismatch)
        );
        out
    }

    /// File name and contents of every report file, in a fixed order.
    pub fn bundle(&self) -> Result<Vec<(String, String)>> {
        let mut files = Vec::new();
        let mut series = Vec::new();
        for s in &self.sediments {
            files.push((
                format!("{}_table.csv", s.sediment),
                io::objectives_csv(&s.table),
            ));
            files.push((format!("{}_sweep.csv", s.sediment), io::sweep_csv(&s.sweep)));
            files.push((
                format!("{}_pareto.csv", s.sediment),
                io::pareto_csv(&s.front),
            ));
            files.push((
                format!("{}_pareto.svg", s.sediment),
                plot::pareto_svg(&s.table)?,
            ));
            series.push((s.sediment.clone(), s.sweep.clone()));
        }
        files.push(("sweep.svg".into(), plot::sweep_svg(&series)?));
        files.push(("diff.csv".into(), self.diff_csv()));
        Ok(files)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        for (name, contents) in self.bundle()? {
            io::atomic_write(&dir.join(name), contents.as_bytes())?;
        }
        Ok(())
    }
}

pub fn reproduce(fixtures: &FixtureSet) -> Result<Report> {
    let reference = reference_rows()?;
    let grid = WeightConfig::default_grid();
    let mut sediments = Vec::new();
    let mut diff = Vec::new();
    for (name, _) in &fixtures.sediments {
        let table = fixtures.union(name)?;
        let sweep = sweep_weights(&table, &grid, TIE_TOLERANCE)?;
        let front = pareto_front(&table);
        for r in reference.iter().filter(|r| &r.sediment == name) {
            let w = WeightConfig::new(r.w1, r.w2)?;
            let selection = sweep
                .iter()
                .find(|s| (s.weights.w1() - r.w1).abs() < 1e-9)
                .cloned()
                .ok_or_else(|| ReproduceError::Reference(format!("w1 {} not on grid", r.w1)))?;
            let published_score = table
                .find(&r.pattern)
                .filter(|row| row.normalized().is_some())
                .map(|row| weighted_sum_value(row, &w))
                .transpose()?;
            let recomputed = r.w1 * r.f1 + r.w2 * r.f2;
            let value_ok = (recomputed - r.value).abs() <= VALUE_TOLERANCE
                && (selection.value - r.value).abs() <= VALUE_TOLERANCE;
            let status = if !value_ok {
                DiffStatus::Mismatch
            } else if selection.chosen.same_key(&r.pattern) {
                DiffStatus::Match
            } else if matches!(published_score, Some(s) if s - selection.value <= TIE_TOLERANCE) {
                DiffStatus::TieMiss
            } else {
                DiffStatus::Mismatch
            };
            diff.push(DiffRow {
                reference: r.clone(),
                recomputed,
                selection,
                published_score,
                status,
            });
        }
        sediments.push(SedimentReport {
            sediment: name.clone(),
            table,
            sweep,
            front,
        });
    }
    Ok(Report { sediments, diff })
}
