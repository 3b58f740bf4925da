use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coring::config::RunConfig;
use coring::io::{self, IngestOptions};
use coring::kinematics::{trajectory, PatternKind, PatternSpec};
use coring::objectives::{build_table, NormalizationScope, ObjectiveTable, TableSpec};
use coring::optimizer::{pareto_front, sweep_weights};
use coring::pipeline::{self, anova_cells, mass_groups, Design};
use coring::plot;
use coring::reproduce::{self, FixtureSet};
use coring::stats::{multiple_comparison, two_way_anova, Preference};

const EXIT_VALIDATION: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coring",
    version,
    about = "Coring-pattern kinematics, objectives and selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Base seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Per-motor current limit in A (overrides `current_limit`).
    #[arg(long, global = true)]
    current_limit: Option<f64>,
    /// Target depth in mm (overrides `target_depth`).
    #[arg(long, global = true)]
    target_depth: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    PerTable,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    /// feed × rotation rate
    Step1,
    /// (feed, rotation) × zig-zag frequency
    Step2,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a rim trajectory.
    Trajectory {
        #[arg(long, value_parser = parse_kind)]
        kind: PatternKind,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        f: f64,
        /// Seconds; defaults to the time needed to reach the target depth.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the two-step protocol on the simulator for each configured sediment.
    Simulate {
        /// Restrict to these sediment names.
        #[arg(long)]
        sediment: Vec<String>,
        #[arg(long)]
        replicates: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Objective table from a trial summary.
    Objectives {
        summary: PathBuf,
        #[arg(long)]
        timeseries_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        scope: Option<Scope>,
        /// Accept values beyond the bench limits.
        #[arg(long)]
        no_platform_limits: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted-sum selection over the weight grid.
    Optimize {
        objectives: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Pareto front of an objective table.
    Pareto {
        objectives: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-way ANOVA and Tukey HSD on trial masses.
    Anova {
        summary: PathBuf,
        #[arg(long, value_enum, default_value = "step1")]
        design: DesignArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        no_platform_limits: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute the published selections from the transcribed tables.
    ReproducePaper {
        /// Directory with table4_*.csv and table5_*.csv; embedded copies otherwise.
        fixtures: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    s.parse()
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load_or_default(common.config.as_deref())?;
    if let Some(d) = &common.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(c) = common.current_limit {
        cfg.current_limit = c;
    }
    if let Some(d) = common.target_depth {
        cfg.target_depth = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::atomic_write(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_bundle(dir: &Path, files: &[(String, String)]) -> Result<()> {
    for (name, contents) in files {
        io::atomic_write(&dir.join(name), contents.as_bytes())?;
    }
    Ok(())
}

fn single_table(path: &Path) -> Result<ObjectiveTable> {
    let mut tables = io::read_objectives(path)?;
    if tables.len() != 1 {
        anyhow::bail!(
            "{}: expected one sediment, found {}",
            path.display(),
            tables.len()
        );
    }
    Ok(tables.remove(0))
}

/// Errors that mean the input was rejected rather than the run failing.
fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<io::IoError>()
            || e.is::<coring::config::ConfigError>()
            || e.is::<coring::kinematics::KinematicsError>()
            || e.is::<coring::objectives::ObjectiveError>()
            || e.is::<coring::stats::StatsError>()
            || e.is::<coring::penetration::SimError>()
            || e.is::<coring::optimizer::OptimizeError>()
            || e.is::<coring::pipeline::PipelineError>()
            || e.is::<coring::reproduce::ReproduceError>()
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Trajectory {
            kind,
            v,
            omega,
            f,
            duration,
            dt,
            out,
            common,
        } => {
            let cfg = load_config(&common)?;
            let pattern = PatternSpec::new(kind, v, omega, f)?;
            let duration = duration.unwrap_or(cfg.target_depth / v);
            let points = trajectory(&pattern, &cfg.geometry, duration, dt)?;
            emit(out.as_deref(), &io::trajectory_csv(&points))?;
        }
        Command::Simulate {
            sediment,
            replicates,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if !sediment.is_empty() {
                cfg.sediments.retain(|s| sediment.contains(&s.name));
                if cfg.sediments.is_empty() {
                    anyhow::bail!(coring::config::ConfigError::Invalid(format!(
                        "no configured sediment named {}",
                        sediment.join(", ")
                    )));
                }
            }
            cfg.validate()?;
            let runs = pipeline::run_all(&cfg)?;
            write_bundle(&cfg.output_dir, &pipeline::bundle(&runs, &cfg)?)?;
            for r in &runs {
                let selected: Vec<String> = r
                    .comparison
                    .selected
                    .iter()
                    .map(|p| p.to_string())
                    .collect();
                println!(
                    "{}: {} trials, step 2 from [{}], front of {}",
                    r.sediment.name,
                    r.step1.len() + r.step2.len(),
                    selected.join(", "),
                    r.front.len()
                );
            }
        }
        Command::Objectives {
            summary,
            timeseries_dir,
            scope,
            no_platform_limits,
            out,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = scope {
                cfg.normalization_scope = match s {
                    Scope::PerTable => NormalizationScope::PerTable,
                    Scope::Joint => NormalizationScope::Joint,
                };
            }
            let opts = IngestOptions {
                timeseries_dir,
                platform_limits: !no_platform_limits,
                kinematic_radius: cfg.geometry.kinematic_radius(),
            };
            let trials = io::read_summary(&summary, &opts)?;
            let spec = TableSpec {
                geometry: cfg.geometry,
                target_depth: cfg.target_depth,
                scope: cfg.normalization_scope,
            };
            let mut text = String::new();
            let mut sediments: Vec<&str> = trials.iter().map(|t| t.sediment.as_str()).collect();
            sediments.sort_unstable();
            sediments.dedup();
            for (i, sed) in sediments.iter().enumerate() {
                let group: Vec<_> = trials
                    .iter()
                    .filter(|t| t.sediment == *sed)
                    .cloned()
                    .collect();
                let csv = io::objectives_csv(&build_table(&group, &spec)?);
                text.push_str(if i == 0 {
                    &csv
                } else {
                    csv.split_once('\n').map_or("", |x| x.1)
                });
            }
            emit(out.as_deref(), &text)?;
        }
        Command::Optimize {
            objectives,
            out,
            common,
        } => {
            let cfg = load_config(&common)?;
            let table = single_table(&objectives)?.with_current_limit(cfg.current_limit);
            let sweep = sweep_weights(&table, &cfg.weight_grid, cfg.tie_tolerance)?;
            emit(out.as_deref(), &io::sweep_csv(&sweep))?;
        }
        Command::Pareto {
            objectives,
            out,
            svg,
            common,
        } => {
            load_config(&common)?;
            let table = single_table(&objectives)?;
            emit(out.as_deref(), &io::pareto_csv(&pareto_front(&table)))?;
            if let Some(p) = svg {
                io::atomic_write(&p, plot::pareto_svg(&table)?.as_bytes())?;
            }
        }
        Command::Anova {
            summary,
            design,
            alpha,
            no_platform_limits,
            common,
        } => {
            let cfg = load_config(&common)?;
            let opts = IngestOptions {
                platform_limits: !no_platform_limits,
                ..IngestOptions::default()
            };
            let trials = io::read_summary(&summary, &opts)?;
            let design = match design {
                DesignArg::Step1 => Design::FeedByRotation,
                DesignArg::Step2 => Design::PairByFrequency,
            };
            let result = two_way_anova(&anova_cells(&trials, design)?)?;
            let groups: Vec<_> = mass_groups(&trials)
                .into_iter()
                .filter(|(p, _)| match design {
                    Design::FeedByRotation => p.kind() != PatternKind::ZigZag,
                    Design::PairByFrequency => p.kind() != PatternKind::Linear,
                })
                .collect();
            let comparison =
                multiple_comparison(&groups, alpha.unwrap_or(cfg.alpha), Preference::Higher)?;
            let files = vec![
                ("anova.csv".to_string(), io::anova_csv(&result)),
                (
                    "comparison.csv".to_string(),
                    io::comparison_csv(&comparison),
                ),
            ];
            write_bundle(&cfg.output_dir, &files)?;
            print!("{}", files[0].1);
        }
        Command::ReproducePaper { fixtures, common } => {
            let cfg = load_config(&common)?;
            let set = match fixtures {
                Some(dir) => FixtureSet::from_dir(&dir)?,
                None => FixtureSet::embedded()?,
            };
            let report = reproduce::reproduce(&set)?;
            report.write(&cfg.output_dir)?;
            print!("{}", report.summary());
            if !report.passed() {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("coring failed") {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_validation(&err) {
                EXIT_VALIDATION
            } else {
                1
            })
        }
    }
}
