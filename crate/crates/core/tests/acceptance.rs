//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coring::kinematics::{position_at, CoreGeometry, PatternKind, PatternSpec};
use coring::objectives::{build_table, f1_raw, f2_raw, normalize, NormalizationScope, TableSpec};
use coring::optimizer::pareto_front;
use coring::penetration::{
    simulate_trial, ForceProfile, SedimentSpec, Termination, TrialConfig, TrialRecord,
};
use coring::reproduce::{reference_rows, reproduce, DiffStatus, FixtureSet};
use coring::stats::two_way_anova;

// Tolerances and limits pinned by the acceptance contract.
const VALUE_TOL: f64 = 0.01;
const EXACT_TOL: f64 = 5e-4;
const EXACT_ROWS: usize = 16;
const MIN_SELECTION_MATCHES: usize = 25;
const KINEMATICS_CASES: usize = 10_000;
const KINEMATICS_REL: f64 = 1e-9;
const ZIGZAG_RATE_REL: f64 = 1e-3;
const NORMALIZE_SETS: usize = 1_000;
const ANOVA_DESIGNS: usize = 100;
const ANOVA_REL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn reference_values() -> Outcome {
    let rows = reference_rows().map_err(|e| e.to_string())?;
    check(rows.len() == 27, format!("{} reference rows", rows.len()))?;
    let mut exact = 0;
    for r in &rows {
        let f = r.w1 * r.f1 + r.w2 * r.f2;
        check(
            (f - r.value).abs() <= VALUE_TOL,
            format!("{} w1={}: {f:.4} vs {}", r.sediment, r.w1, r.value),
        )?;
        if (f - r.value).abs() < EXACT_TOL {
            exact += 1;
        } else {
            check(
                r.sediment != "medium_sand",
                format!("medium sand w1={} not exact", r.w1),
            )?;
        }
    }
    check(
        exact == EXACT_ROWS,
        format!("{exact} exact rows, expected {EXACT_ROWS}"),
    )?;
    let m = rows
        .iter()
        .find(|r| r.sediment == "medium_sand" && r.w1 == 0.9)
        .ok_or("medium sand w1=0.9 missing")?;
    let f = m.w1 * m.f1 + m.w2 * m.f2;
    check(
        (f - 1.239).abs() < 1e-12,
        format!("medium w1=0.9 gives {f}"),
    )?;
    Ok(format!(
        "27/27 within {VALUE_TOL}, {exact} exact, medium sand w1=0.9 F={f:.3}"
    ))
}

fn reference_selection() -> Outcome {
    let report = reproduce(&FixtureSet::embedded().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let matches = report.count(DiffStatus::Match);
    let ties = report.count(DiffStatus::TieMiss);
    let mismatches = report.count(DiffStatus::Mismatch);
    check(report.diff.len() == 27, "diff must have 27 rows")?;
    check(mismatches == 0, format!("{mismatches} mismatches"))?;
    check(
        matches >= MIN_SELECTION_MATCHES,
        format!("{matches} matches < {MIN_SELECTION_MATCHES}"),
    )?;
    let listed = report
        .diff_csv()
        .lines()
        .filter(|l| l.ends_with(",tie_miss"))
        .count();
    check(listed == ties, "tie misses not listed in the diff report")?;
    Ok(format!("{matches}/27 selections match, {ties} tie misses"))
}

fn pareto_membership() -> Outcome {
    let fixtures = FixtureSet::embedded().map_err(|e| e.to_string())?;
    let rows = reference_rows().map_err(|e| e.to_string())?;
    let mut sizes = BTreeMap::new();
    for (sediment, _) in &fixtures.sediments {
        let table = fixtures.union(sediment).map_err(|e| e.to_string())?;
        let front = pareto_front(&table);
        for r in rows
            .iter()
            .filter(|r| &r.sediment == sediment && r.w1 > 0.0 && r.w2 > 0.0)
        {
            check(
                front.iter().any(|f| f.pattern.same_key(&r.pattern)),
                format!("{} {} not on the front", sediment, r.pattern),
            )?;
        }
        sizes.insert(sediment.clone(), front);
    }
    let coarse = &sizes["coarse_sand"];
    let expect = [
        PatternSpec::zigzag(38.0, 12.0, 10.0).unwrap(),
        PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap(),
    ];
    check(
        coarse.len() == 2,
        format!("coarse front has {} members", coarse.len()),
    )?;
    check(
        expect
            .iter()
            .all(|p| coarse.iter().any(|r| r.pattern.same_key(p))),
        "coarse front members differ",
    )?;
    Ok(format!(
        "all selections on their fronts; front sizes coarse {}, medium {}, silt {}",
        coarse.len(),
        sizes["medium_sand"].len(),
        sizes["silt"].len()
    ))
}

fn random_pattern(rng: &mut ChaCha8Rng) -> PatternSpec {
    let v = rng.random_range(0.5..=38.0);
    let omega = rng.random_range(0.1..=12.0);
    match rng.random_range(0..3) {
        0 => PatternSpec::linear(v).unwrap(),
        1 => PatternSpec::helical(v, omega).unwrap(),
        _ => PatternSpec::zigzag(v, omega, rng.random_range(1.0..=50.0)).unwrap(),
    }
}

fn kinematics_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b69_6e65);
    let mut zigzags = 0;
    for _ in 0..KINEMATICS_CASES {
        let r = rng.random_range(1.0..=25.4);
        let geom = CoreGeometry::default().with_kinematic_radius(r).unwrap();
        let p = random_pattern(&mut rng);
        let t = rng.random_range(0.0..=20.0);
        let pt = position_at(&p, &geom, t).map_err(|e| e.to_string())?;
        let vt = p.feed() * t;
        check(
            (pt.z + vt).abs() <= KINEMATICS_REL * vt.max(f64::MIN_POSITIVE),
            format!("{p} t={t}: z={} vs {}", pt.z, -vt),
        )?;
        let rr = pt.x * pt.x + pt.y * pt.y;
        check(
            (rr - r * r).abs() <= KINEMATICS_REL * r * r,
            format!("{p} t={t}: radius² {rr} vs {}", r * r),
        )?;
        if p.kind() == PatternKind::ZigZag {
            zigzags += 1;
            let amp = 10.0 * p.omega() / p.frequency();
            check(
                pt.theta >= 0.0 && pt.theta <= amp * (1.0 + 1e-12),
                format!("{p} t={t}: theta {} outside [0, {amp}]", pt.theta),
            )?;
        }
    }
    // Peak angular rate by forward differences over one reversal period.
    for _ in 0..200 {
        let p = PatternSpec::zigzag(
            rng.random_range(1.0..=38.0),
            rng.random_range(0.5..=12.0),
            rng.random_range(1.0..=50.0),
        )
        .unwrap();
        let period = p.reversal_period().unwrap();
        let h = period * 1e-7;
        let steps = 2_000;
        let peak = (0..steps)
            .map(|k| {
                let t = period * k as f64 / steps as f64;
                ((p.angle(t + h) - p.angle(t)) / h).abs()
            })
            .fold(0.0f64, f64::max);
        check(
            (peak - p.omega()).abs() <= ZIGZAG_RATE_REL * p.omega(),
            format!("{p}: peak rate {peak} vs {}", p.omega()),
        )?;
    }
    Ok(format!(
        "{KINEMATICS_CASES} cases ({zigzags} zig-zag), 200 peak-rate checks"
    ))
}

fn synthetic_trial(id: u64, p: PatternSpec, mass: f64, work: f64, duration: f64) -> TrialRecord {
    TrialRecord {
        trial_id: id,
        pattern: p,
        sediment: "synthetic".into(),
        samples: Vec::new(),
        mass_g: mass,
        depth: 200.0,
        travel: 200.0,
        duration,
        work,
        terminated_by: Termination::ReachedDepth,
        no_timeseries: false,
    }
}

fn objectives_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f62_6a73);
    for _ in 0..NORMALIZE_SETS {
        let n = rng.random_range(2..40);
        let values: Vec<Option<f64>> = (0..n)
            .map(|_| Some(rng.random_range(0.01..100.0)))
            .collect();
        let lo = values
            .iter()
            .flatten()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let hi = values
            .iter()
            .flatten()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let out = normalize(&values).map_err(|e| e.to_string())?;
        for (v, o) in values.iter().zip(&out.values) {
            let o = o.ok_or("value dropped")?;
            if v.unwrap() == lo {
                check((o - 1.0).abs() < 1e-12, format!("min maps to {o}"))?;
            }
            if v.unwrap() == hi {
                check((o - 10.0).abs() < 1e-12, format!("max maps to {o}"))?;
            }
            check((1.0..=10.0).contains(&o), format!("{o} outside [1, 10]"))?;
        }
    }
    let volume = 358.9;
    for _ in 0..1_000 {
        let (ma, mb) = (rng.random_range(1.0..600.0), rng.random_range(1.0..600.0));
        let (fa, fb) = (
            f1_raw(ma, volume).unwrap().unwrap(),
            f1_raw(mb, volume).unwrap().unwrap(),
        );
        check(
            (ma > mb) == (fa < fb) || ma == mb,
            "f1 not reciprocal in mass",
        )?;
        let (wa, wb) = (rng.random_range(1.0..1e6), rng.random_range(1.0..1e6));
        let d = rng.random_range(1.0..20.0);
        let (ga, gb) = (
            f2_raw(wa, d).unwrap().unwrap(),
            f2_raw(wb, d).unwrap().unwrap(),
        );
        check(
            (wa > wb) == (ga < gb) || wa == wb,
            "f2 not reciprocal in power",
        )?;
    }
    let spec = TableSpec {
        geometry: CoreGeometry::default(),
        target_depth: 200.0,
        scope: NormalizationScope::PerTable,
    };
    for case in 0..200 {
        let mut trials = Vec::new();
        let mut id = 0;
        let groups = rng.random_range(2..8);
        for g in 0..groups {
            let p = PatternSpec::helical(15.0 + g as f64, 3.0).unwrap();
            for _ in 0..3 {
                id += 1;
                trials.push(synthetic_trial(
                    id,
                    p,
                    rng.random_range(50.0..500.0),
                    rng.random_range(1e3..1e5),
                    rng.random_range(4.0..14.0),
                ));
            }
        }
        let base = build_table(&trials, &spec).map_err(|e| e.to_string())?;
        let zero = PatternSpec::linear(38.0).unwrap();
        let mut with_zero = trials.clone();
        for k in 0..3 {
            with_zero.push(synthetic_trial(1000 + k, zero, 0.0, 1e4, 5.0));
        }
        let added = build_table(&with_zero, &spec).map_err(|e| e.to_string())?;
        check(
            added.find(&zero).map(|r| r.excluded) == Some(true),
            "zero row not excluded",
        )?;
        for row in &base.rows {
            let other = added.find(&row.pattern).ok_or("row lost")?;
            check(
                other.normalized() == row.normalized(),
                format!(
                    "case {case}: {} changed after adding a zero-mass row",
                    row.pattern
                ),
            )?;
        }
        let removed: Vec<TrialRecord> = with_zero
            .into_iter()
            .filter(|t| !t.pattern.same_key(&zero))
            .collect();
        check(
            build_table(&removed, &spec)
                .map_err(|e| e.to_string())?
                .rows
                == base.rows,
            "removing the zero-mass row is not idempotent",
        )?;
    }
    Ok(format!(
        "{NORMALIZE_SETS} normalization sets, 1000 monotonicity pairs, 200 exclusion cases"
    ))
}

/// Sums of squares from raw totals: the textbook computing formulas.
fn anova_oracle(cells: &[Vec<Vec<f64>>]) -> [f64; 5] {
    let a = cells.len();
    let b = cells[0].len();
    let n = cells[0][0].len();
    let big_n = (a * b * n) as f64;
    let total: f64 = cells.iter().flatten().flatten().sum();
    let c = total * total / big_n;
    let sum_sq: f64 = cells.iter().flatten().flatten().map(|y| y * y).sum();
    let ss_total = sum_sq - c;
    let ss_a = cells
        .iter()
        .map(|row| row.iter().flatten().sum::<f64>().powi(2))
        .sum::<f64>()
        / (b * n) as f64
        - c;
    let ss_b = (0..b)
        .map(|j| cells.iter().flat_map(|row| &row[j]).sum::<f64>().powi(2))
        .sum::<f64>()
        / (a * n) as f64
        - c;
    let ss_cells = cells
        .iter()
        .flatten()
        .map(|cell| cell.iter().sum::<f64>().powi(2))
        .sum::<f64>()
        / n as f64
        - c;
    [
        ss_a,
        ss_b,
        ss_cells - ss_a - ss_b,
        ss_total - ss_cells,
        ss_total,
    ]
}

fn anova_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x616e_6f76);
    for case in 0..ANOVA_DESIGNS {
        let a = rng.random_range(2..=4);
        let b = rng.random_range(2..=5);
        let n = rng.random_range(2..=4);
        let cells: Vec<Vec<Vec<f64>>> = (0..a)
            .map(|i| {
                (0..b)
                    .map(|j| {
                        (0..n)
                            .map(|_| i as f64 + 0.5 * j as f64 + rng.random_range(-2.0..2.0))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let r = two_way_anova(&cells).map_err(|e| e.to_string())?;
        let oracle = anova_oracle(&cells);
        let got = [r.ss_a, r.ss_b, r.ss_ab, r.ss_error, r.ss_total];
        for (name, (g, o)) in ["A", "B", "AB", "error", "total"]
            .iter()
            .zip(got.iter().zip(oracle))
        {
            check(
                (g - o).abs() <= ANOVA_REL * o.abs(),
                format!("case {case} ({a}x{b}x{n}) SS_{name}: {g} vs {o}"),
            )?;
        }
        let sum = r.ss_a + r.ss_b + r.ss_ab + r.ss_error;
        check(
            (sum - r.ss_total).abs() <= ANOVA_REL * r.ss_total,
            format!("case {case}: decomposition {sum} vs {}", r.ss_total),
        )?;
        check(
            (r.df_a, r.df_b, r.df_ab, r.df_error)
                == (a - 1, b - 1, (a - 1) * (b - 1), a * b * (n - 1)),
            format!("case {case}: degrees of freedom"),
        )?;
    }
    let flat = vec![vec![vec![3.25; 3]; 4]; 3];
    let r = two_way_anova(&flat).map_err(|e| e.to_string())?;
    check(
        r.p_a == 1.0 && r.p_b == 1.0 && r.p_ab == 1.0,
        "zero-variance p-values must be 1",
    )?;
    Ok(format!(
        "{ANOVA_DESIGNS} designs match the raw-sum oracle; zero variance gives p = 1"
    ))
}

fn simulator_suite() -> Outcome {
    let geom = CoreGeometry::default();
    let quiet = TrialConfig {
        mass_noise: 0.0,
        ..TrialConfig::default()
    };
    let none = SedimentSpec::frictionless("none");
    for p in [
        PatternSpec::linear(29.0).unwrap(),
        PatternSpec::helical(15.0, 12.0).unwrap(),
        PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap(),
    ] {
        let t = simulate_trial(1, &p, &none, &geom, &quiet).map_err(|e| e.to_string())?;
        check(t.depth == 200.0, format!("{p}: depth {}", t.depth))?;
        check(
            t.duration == 200.0 / p.feed(),
            format!("{p}: duration {} vs {}", t.duration, 200.0 / p.feed()),
        )?;
    }
    let undriven = TrialConfig {
        external_force: ForceProfile::Constant { force_n: 0.0 },
        ..quiet
    };
    let coarse = SedimentSpec::coarse_sand();
    let t = simulate_trial(
        1,
        &PatternSpec::linear(38.0).unwrap(),
        &coarse,
        &geom,
        &undriven,
    )
    .map_err(|e| e.to_string())?;
    check(t.depth == 0.0, format!("undriven depth {}", t.depth))?;

    let config = TrialConfig::default();
    let mass = |p: PatternSpec, id| {
        simulate_trial(id, &p, &coarse, &geom, &config)
            .map(|t| t.mass_g)
            .map_err(|e| e.to_string())
    };
    let m3 = mass(PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap(), 1)?;
    let m2 = mass(PatternSpec::helical(38.0, 12.0).unwrap(), 2)?;
    let m1 = mass(PatternSpec::linear(38.0).unwrap(), 3)?;
    check(
        m3 > m2 && m2 > m1,
        format!("coarse masses P3 {m3:.1} g, P2 {m2:.1} g, P1 {m1:.1} g out of order"),
    )?;
    Ok(format!(
        "frictionless exact, undriven depth 0, coarse P3 {m3:.1} g > P2 {m2:.1} g > P1 {m1:.1} g"
    ))
}

fn read_bundle(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bundles = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_coring"))
            .args(["reproduce-paper", "--out-dir"])
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        check(
            status.status.success(),
            format!("reproduce-paper exited with {:?}", status.status.code()),
        )?;
        bundles.push(read_bundle(&dir)?);
    }
    check(!bundles[0].is_empty(), "empty bundle")?;
    check(bundles[0] == bundles[1], "bundles differ")?;
    let svgs = bundles[0].keys().filter(|k| k.ends_with(".svg")).count();
    Ok(format!(
        "{} files byte-identical ({svgs} SVG)",
        bundles[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "reference values",
            reference_values,
            Some(Duration::from_secs(1)),
        ),
        (
            "reference selections",
            reference_selection,
            Some(Duration::from_secs(1)),
        ),
        ("pareto membership", pareto_membership, None),
        (
            "kinematics properties",
            kinematics_suite,
            Some(Duration::from_secs(5)),
        ),
        ("objectives properties", objectives_suite, None),
        ("anova oracle", anova_suite, None),
        (
            "simulator properties",
            simulator_suite,
            Some(Duration::from_secs(10)),
        ),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Ok(msg), Some(limit)) = (&outcome, limit) {
            if elapsed > *limit {
                outcome = Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(msg) => println!("criterion {} ({name}): PASS {msg} [{elapsed:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL {msg} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
