//! CSV formats for trajectories, trial logs, objective tables and reports.
//!
//! Every number is written fixed-point with six decimals. Files are written
//! to a temporary sibling and renamed into place.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kinematics::{PatternKind, PatternSpec, TrajectoryPoint};
use crate::objectives::{ObjectiveRow, ObjectiveTable, RowSource};
use crate::optimizer::SelectionResult;
use crate::penetration::{Sample, Termination, TrialRecord};
use crate::stats::{AnovaResult, ComparisonOutcome};

pub const TRAJECTORY_HEADER: &str = "t_s,x_mm,y_mm,z_mm,theta_rad";
pub const TIMESERIES_HEADER: &str = "t_s,z_mm,theta_rad,force_N,current1_A,current2_A";
pub const SUMMARY_HEADER: &str = "trial_id,sediment,kind,v_mm_s,omega_rad_s,f_r_hz,mass_g,depth_mm,travel_mm,duration_s,work_Nmm,terminated_by";
pub const OBJECTIVES_HEADER: &str =
    "sediment,kind,v_mm_s,omega_rad_s,f_r_hz,f1_raw,f2_raw,f1_norm,f2_norm,excluded,n_trials";
pub const SWEEP_HEADER: &str = "w1,w2,f1,f2,F,kind,v_mm_s,omega_rad_s,f_r_hz,ties";
pub const PARETO_HEADER: &str = "f1_norm,f2_norm,kind,v_mm_s,omega_rad_s,f_r_hz";
pub const ANOVA_HEADER: &str = "source,ss,df,F,p";
pub const COMPARISON_HEADER: &str = "pattern_a,pattern_b,mean_diff,p_adj,significant";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}:{line}: {message}")]
    Row {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}: header mismatch: expected `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

/// Fixed-point with six decimals; negative zero prints as zero.
pub fn fmt6(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_default()
}

fn pattern_fields(p: &PatternSpec) -> String {
    format!(
        "{},{},{},{}",
        p.kind().as_str(),
        fmt6(p.feed()),
        fmt6(p.omega()),
        fmt6(p.frequency())
    )
}

/// Writes `contents` next to `path` and renames it into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let wrap = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(wrap)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(wrap)
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt6(p.t),
            fmt6(p.x),
            fmt6(p.y),
            fmt6(p.z),
            fmt6(p.theta)
        );
    }
    out
}

pub fn timeseries_csv(samples: &[Sample]) -> String {
    let mut out = String::from(TIMESERIES_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt6(s.t),
            fmt6(s.z),
            fmt6(s.theta),
            fmt6(s.force),
            fmt6(s.c1),
            fmt6(s.c2)
        );
    }
    out
}

pub fn summary_csv(trials: &[TrialRecord]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for t in trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t.trial_id,
            t.sediment,
            pattern_fields(&t.pattern),
            fmt6(t.mass_g),
            fmt6(t.depth),
            fmt6(t.travel),
            fmt6(t.duration),
            fmt6(t.work),
            t.terminated_by.as_str()
        );
    }
    out
}

pub fn objectives_csv(table: &ObjectiveTable) -> String {
    let mut out = String::from(OBJECTIVES_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            table.sediment,
            pattern_fields(&r.pattern),
            fmt_opt(r.f1_raw),
            fmt_opt(r.f2_raw),
            fmt_opt(r.f1_norm),
            fmt_opt(r.f2_norm),
            r.excluded,
            r.n_trials
        );
    }
    out
}

pub fn sweep_csv(results: &[SelectionResult]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for s in results {
        let ties: Vec<String> = s.ties.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt6(s.weights.w1()),
            fmt6(s.weights.w2()),
            fmt6(s.f1),
            fmt6(s.f2),
            fmt6(s.value),
            pattern_fields(&s.chosen),
            ties.join(";")
        );
    }
    out
}

pub fn pareto_csv(front: &[ObjectiveRow]) -> String {
    let mut out = String::from(PARETO_HEADER);
    out.push('\n');
    for r in front {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_opt(r.f1_norm),
            fmt_opt(r.f2_norm),
            pattern_fields(&r.pattern)
        );
    }
    out
}

pub fn anova_csv(result: &AnovaResult) -> String {
    let mut out = String::from(ANOVA_HEADER);
    out.push('\n');
    for line in result.lines() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            line.source,
            fmt6(line.ss),
            line.df,
            fmt_opt(line.f),
            fmt_opt(line.p)
        );
    }
    out
}

pub fn comparison_csv(outcome: &ComparisonOutcome) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for p in &outcome.pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.a,
            p.b,
            fmt6(p.mean_diff),
            fmt6(p.p_adj),
            p.significant
        );
    }
    out
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &str, path: &str) -> Result<()> {
    let found = rdr
        .headers()
        .map_err(|source| IoError::Csv {
            path: path.into(),
            source,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != expected {
        return Err(IoError::Header {
            path: path.into(),
            expected: expected.into(),
            found,
        });
    }
    Ok(())
}

/// Field accessor that reports the file and line of a bad value.
struct Row<'a> {
    record: &'a csv::StringRecord,
    path: &'a str,
    line: u64,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> IoError {
        IoError::Row {
            path: self.path.into(),
            line: self.line,
            message: message.into(),
        }
    }

    fn str(&self, i: usize, name: &str) -> Result<&str> {
        self.record
            .get(i)
            .ok_or_else(|| self.err(format!("missing field `{name}`")))
    }

    fn f64(&self, i: usize, name: &str) -> Result<f64> {
        let s = self.str(i, name)?;
        let x: f64 = s
            .parse()
            .map_err(|_| self.err(format!("`{name}`: cannot parse `{s}` as a number")))?;
        if !x.is_finite() {
            return Err(self.err(format!("`{name}` must be finite")));
        }
        Ok(x)
    }

    fn opt_f64(&self, i: usize, name: &str) -> Result<Option<f64>> {
        if self.str(i, name)?.is_empty() {
            Ok(None)
        } else {
            self.f64(i, name).map(Some)
        }
    }

    fn non_negative(&self, i: usize, name: &str) -> Result<f64> {
        let x = self.f64(i, name)?;
        if x < 0.0 {
            return Err(self.err(format!("`{name}` must be >= 0, got {x}")));
        }
        Ok(x)
    }

    fn pattern(&self, first: usize, platform: bool) -> Result<PatternSpec> {
        let kind: PatternKind = self
            .str(first, "kind")?
            .parse()
            .map_err(|e: String| self.err(e))?;
        let v = self.f64(first + 1, "v_mm_s")?;
        let omega = self.f64(first + 2, "omega_rad_s")?;
        let f = self.f64(first + 3, "f_r_hz")?;
        let p = PatternSpec::new(kind, v, omega, f).map_err(|e| self.err(e.to_string()))?;
        if platform {
            p.check_platform().map_err(|e| self.err(e.to_string()))?;
        }
        Ok(p)
    }
}

fn located(item: csv::Result<csv::StringRecord>, path: &str) -> Result<(csv::StringRecord, u64)> {
    let record = item.map_err(|source| IoError::Csv {
        path: path.into(),
        source,
    })?;
    let line = record.position().map(|p| p.line()).unwrap_or(0);
    Ok((record, line))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// How a trial summary is validated and completed.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// Directory holding `<trial_id>.csv` time series. When set, a missing
    /// file marks the trial `no_timeseries`.
    pub timeseries_dir: Option<PathBuf>,
    /// Reject feeds, rates and frequencies the bench cannot produce.
    pub platform_limits: bool,
    /// Rim radius used to rebuild path length from a time series, mm.
    pub kinematic_radius: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            timeseries_dir: None,
            platform_limits: true,
            kinematic_radius: crate::kinematics::CoreGeometry::default().kinematic_radius(),
        }
    }
}

/// Parses a trial summary.
pub fn parse_summary(text: &str, path: &str, opts: &IngestOptions) -> Result<Vec<TrialRecord>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, SUMMARY_HEADER, path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in rdr.records() {
        let (record, line) = located(item, path)?;
        let row = Row {
            record: &record,
            path,
            line,
        };
        let id_text = row.str(0, "trial_id")?;
        let trial_id: u64 = id_text
            .parse()
            .map_err(|_| row.err(format!("bad trial_id `{id_text}`")))?;
        if !seen.insert(trial_id) {
            return Err(row.err(format!("duplicate trial_id {trial_id}")));
        }
        let sediment = row.str(1, "sediment")?.to_string();
        if sediment.is_empty() {
            return Err(row.err("empty sediment"));
        }
        let pattern = row.pattern(2, opts.platform_limits)?;
        let term_text = row.str(11, "terminated_by")?;
        let terminated_by: Termination = term_text.parse().map_err(|e: String| row.err(e))?;
        let mut trial = TrialRecord {
            trial_id,
            pattern,
            sediment,
            samples: Vec::new(),
            mass_g: row.non_negative(6, "mass_g")?,
            depth: row.non_negative(7, "depth_mm")?,
            travel: row.non_negative(8, "travel_mm")?,
            duration: row.non_negative(9, "duration_s")?,
            work: row.non_negative(10, "work_Nmm")?,
            terminated_by,
            no_timeseries: false,
        };
        if let Some(dir) = &opts.timeseries_dir {
            let file = dir.join(format!("{trial_id}.csv"));
            if file.is_file() {
                let text = read_file(&file)?;
                trial.samples =
                    parse_timeseries(&text, &file.display().to_string(), opts.kinematic_radius)?;
            } else {
                trial.no_timeseries = true;
            }
        }
        out.push(trial);
    }
    Ok(out)
}

pub fn read_summary(path: &Path, opts: &IngestOptions) -> Result<Vec<TrialRecord>> {
    parse_summary(&read_file(path)?, &path.display().to_string(), opts)
}

/// Parses a trial time series; the cumulative path length is rebuilt from
/// consecutive (z, θ) pairs at the given rim radius.
pub fn parse_timeseries(text: &str, path: &str, radius: f64) -> Result<Vec<Sample>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, TIMESERIES_HEADER, path)?;
    let mut out: Vec<Sample> = Vec::new();
    for item in rdr.records() {
        let (record, line) = located(item, path)?;
        let row = Row {
            record: &record,
            path,
            line,
        };
        let t = row.non_negative(0, "t_s")?;
        let z = row.f64(1, "z_mm")?;
        let theta = row.f64(2, "theta_rad")?;
        let mut travel = 0.0;
        if let Some(prev) = out.last() {
            if t < prev.t {
                return Err(row.err("time goes backwards"));
            }
            travel = prev.travel + (z - prev.z).hypot(radius * (theta - prev.theta));
        }
        out.push(Sample {
            t,
            z,
            theta,
            force: row.f64(3, "force_N")?,
            c1: row.non_negative(4, "current1_A")?,
            c2: row.non_negative(5, "current2_A")?,
            travel,
        });
    }
    Ok(out)
}

/// Parses objective tables, one per sediment in order of first appearance.
/// Rows without raw values make the table `Transcribed`.
pub fn parse_objectives(text: &str, path: &str) -> Result<Vec<ObjectiveTable>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, OBJECTIVES_HEADER, path)?;
    let mut groups: Vec<(String, Vec<ObjectiveRow>, bool)> = Vec::new();
    for item in rdr.records() {
        let (record, line) = located(item, path)?;
        let row = Row {
            record: &record,
            path,
            line,
        };
        let sediment = row.str(0, "sediment")?.to_string();
        let pattern = row.pattern(1, false)?;
        let f1_raw = row.opt_f64(5, "f1_raw")?;
        let f2_raw = row.opt_f64(6, "f2_raw")?;
        let f1_norm = row.opt_f64(7, "f1_norm")?;
        let f2_norm = row.opt_f64(8, "f2_norm")?;
        let excluded = match row.str(9, "excluded")? {
            "true" => true,
            "false" => false,
            other => {
                return Err(row.err(format!("`excluded` must be true or false, got `{other}`")))
            }
        };
        let n_text = row.str(10, "n_trials")?;
        let n_trials: usize = n_text
            .parse()
            .map_err(|_| row.err(format!("bad n_trials `{n_text}`")))?;
        if !excluded && (f1_norm.is_none() || f2_norm.is_none()) {
            return Err(row.err("non-excluded row needs both normalized values"));
        }
        for (name, v) in [("f1_raw", f1_raw), ("f2_raw", f2_raw)] {
            if matches!(v, Some(x) if x <= 0.0) {
                return Err(row.err(format!("`{name}` must be positive")));
            }
        }
        let transcribed = f1_raw.is_none() && f2_raw.is_none();
        let obj = ObjectiveRow {
            pattern,
            f1_raw,
            f2_raw,
            f1_norm,
            f2_norm,
            excluded,
            n_trials,
            currents: None,
        };
        match groups.iter_mut().find(|g| g.0 == sediment) {
            Some(g) => {
                g.1.push(obj);
                g.2 |= transcribed;
            }
            None => groups.push((sediment, vec![obj], transcribed)),
        }
    }
    if groups.is_empty() {
        return Err(IoError::Invalid {
            path: path.into(),
            message: "no rows".into(),
        });
    }
    groups
        .into_iter()
        .map(|(sediment, rows, transcribed)| {
            let source = if transcribed {
                RowSource::Transcribed
            } else {
                RowSource::Measured
            };
            ObjectiveTable::from_rows(sediment, rows, source).map_err(|e| IoError::Invalid {
                path: path.into(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_objectives(path: &Path) -> Result<Vec<ObjectiveTable>> {
    parse_objectives(&read_file(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUMMARY: &str = "\
trial_id,sediment,kind,v_mm_s,omega_rad_s,f_r_hz,mass_g,depth_mm,travel_mm,duration_s,work_Nmm,terminated_by
1,coarse_sand,linear,38,0,0,120.5,165.2,165.2,4.35,10906.5,stalled
2,coarse_sand,helical,38,12,0,216.2,200,1227.1,5.26,183142,reached_depth
3,coarse_sand,zigzag,38,12,30,328.3,200,700.3,5.29,117059.1,reached_depth
";

    #[test]
    fn valid_summary() {
        let trials = parse_summary(SUMMARY, "s.csv", &IngestOptions::default()).unwrap();
        assert_eq!(trials.len(), 3);
        assert_eq!(
            trials[2].pattern,
            PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap()
        );
        assert!(!trials[0].no_timeseries);
    }

    #[test]
    fn negative_mass_reports_line() {
        let text = SUMMARY.replace("216.2", "-1");
        let err = parse_summary(&text, "s.csv", &IngestOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("s.csv:3:"), "{err}");
    }

    #[test]
    fn duplicate_and_platform_checks() {
        let text = SUMMARY.replace("\n3,", "\n2,");
        let err = parse_summary(&text, "s.csv", &IngestOptions::default()).unwrap_err();
        assert!(err.to_string().contains("duplicate trial_id 2"));
        let text = SUMMARY.replace("helical,38,", "helical,40,");
        assert!(parse_summary(&text, "s.csv", &IngestOptions::default()).is_err());
        let opts = IngestOptions {
            platform_limits: false,
            ..IngestOptions::default()
        };
        assert!(parse_summary(&text, "s.csv", &opts).is_ok());
    }

    #[test]
    fn header_checked() {
        let text = SUMMARY.replacen("trial_id", "id", 1);
        assert!(matches!(
            parse_summary(&text, "s.csv", &IngestOptions::default()),
            Err(IoError::Header { .. })
        ));
    }

    #[test]
    fn summary_round_trip() {
        let trials = parse_summary(SUMMARY, "s.csv", &IngestOptions::default()).unwrap();
        let again =
            parse_summary(&summary_csv(&trials), "t.csv", &IngestOptions::default()).unwrap();
        assert_eq!(trials, again);
    }

    #[test]
    fn objective_rows_with_comments() {
        let text = "\
# provenance line
sediment,kind,v_mm_s,omega_rad_s,f_r_hz,f1_raw,f2_raw,f1_norm,f2_norm,excluded,n_trials
coarse_sand,linear,15,0,0,,,,,true,3
coarse_sand,helical,15,6,0,,,4.69,7.02,false,3
";
        let tables = parse_objectives(text, "o.csv").unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].source, RowSource::Transcribed);
        assert!(tables[0].rows[0].excluded);
        let again = parse_objectives(&objectives_csv(&tables[0]), "o2.csv").unwrap();
        assert_eq!(again[0].rows, tables[0].rows);
    }

    #[test]
    fn fixed_point() {
        assert_eq!(fmt6(-0.0), "0.000000");
        assert_eq!(fmt6(-1e-9), "0.000000");
        assert_eq!(fmt6(1.5), "1.500000");
        assert_eq!(fmt6(f64::INFINITY), "inf");
    }
}
