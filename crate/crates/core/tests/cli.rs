use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coring::io::{
    read_objectives, ANOVA_HEADER, COMPARISON_HEADER, OBJECTIVES_HEADER, PARETO_HEADER,
    SWEEP_HEADER, TRAJECTORY_HEADER,
};

const SUMMARY: &str = "\
trial_id,sediment,kind,v_mm_s,omega_rad_s,f_r_hz,mass_g,depth_mm,travel_mm,duration_s,work_Nmm,terminated_by
1,coarse_sand,linear,38,0,0,120.5,165.2,165.2,4.35,10906.5,stalled
2,coarse_sand,helical,38,12,0,216.2,200,1227.1,5.26,183142,reached_depth
3,coarse_sand,zigzag,38,12,30,328.3,200,700.3,5.29,117059.1,reached_depth
";

fn coring(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coring"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn coring")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn objectives_from_valid_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("summary.csv"), SUMMARY).unwrap();
    let out = coring(
        &["objectives", "summary.csv", "--out", "obj.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("obj.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(OBJECTIVES_HEADER));
    assert_eq!(lines.count(), 3);

    let tables = read_objectives(&dir.path().join("obj.csv")).unwrap();
    let zz = tables[0]
        .rows
        .iter()
        .find(|r| r.pattern.frequency() == 30.0)
        .unwrap();
    assert_eq!(zz.f1_norm, Some(1.0));
}

#[test]
fn negative_mass_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.csv"),
        SUMMARY.replace("216.2", "-216.2"),
    )
    .unwrap();
    let out = coring(&["objectives", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.csv:3:"), "{err}");
    assert!(err.contains("mass_g"), "{err}");
}

#[test]
fn missing_timeseries_leaves_f2_empty() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("summary.csv"), SUMMARY).unwrap();
    fs::create_dir(dir.path().join("ts")).unwrap();
    let samples = "\
t_s,z_mm,theta_rad,force_N,current1_A,current2_A
0,0,0,10,0.5,0.5
1,-29,0,10,0.5,0.5
";
    fs::write(dir.path().join("ts/3.csv"), samples).unwrap();
    let out = coring(
        &["objectives", "summary.csv", "--timeseries-dir", "ts"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let row = |kind: &str| {
        text.lines()
            .find(|l| l.split(',').nth(1) == Some(kind))
            .unwrap()
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(row("linear")[6], "");
    assert_eq!(row("helical")[6], "");
    assert_ne!(row("zigzag")[6], "");
}

#[test]
fn optimize_and_pareto_from_objectives() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("summary.csv"), SUMMARY).unwrap();
    assert!(coring(
        &["objectives", "summary.csv", "--out", "obj.csv"],
        dir.path()
    )
    .status
    .success());
    let out = coring(&["optimize", "obj.csv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(text.lines().count(), 10);

    let out = coring(&["pareto", "obj.csv", "--svg", "front.svg"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().next(), Some(PARETO_HEADER));
    let svg = fs::read_to_string(dir.path().join("front.svg")).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
}

#[test]
fn trajectory_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = coring(
        &[
            "trajectory",
            "--kind",
            "zigzag",
            "--v",
            "29",
            "--omega",
            "12",
            "--f",
            "10",
            "--duration",
            "1",
            "--dt",
            "0.1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(TRAJECTORY_HEADER));
    assert_eq!(text.lines().count(), 12);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(last[0], 1.0);
    assert_eq!(last[3], -29.0);
}

#[test]
fn trajectory_rejects_bad_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = coring(
        &[
            "trajectory",
            "--kind",
            "zigzag",
            "--v",
            "29",
            "--omega",
            "12",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn reproduce_paper_passes_on_embedded_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = coring(&["reproduce-paper", "--out-dir", "r"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let diff = fs::read_to_string(dir.path().join("r/diff.csv")).unwrap();
    assert_eq!(diff.lines().count(), 28);
    assert!(!diff.contains("mismatch"));
}

#[test]
fn tampered_fixture_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let copy = dir.path().join("fixtures");
    fs::create_dir(&copy).unwrap();
    for entry in fs::read_dir(&fixtures).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), copy.join(entry.file_name())).unwrap();
    }
    let path = copy.join("table5_medium_sand.csv");
    let text = fs::read_to_string(&path).unwrap();
    let tampered = text.replace(
        "medium_sand,zigzag,29,12,10,,,1.07,3.30",
        "medium_sand,zigzag,29,12,10,,,1.07,1.00",
    );
    assert_ne!(tampered, text);
    fs::write(&path, tampered).unwrap();

    let out = coring(
        &["reproduce-paper", "fixtures", "--out-dir", "r"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let diff = fs::read_to_string(dir.path().join("r/diff.csv")).unwrap();
    assert!(
        diff.lines()
            .any(|l| l.starts_with("medium_sand") && l.ends_with("mismatch")),
        "{diff}"
    );
}

#[test]
fn missing_fixture_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = coring(&["reproduce-paper", "."], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"dt": 0.005, "replicates": 2, "seed": 11}"#,
    )
    .unwrap();
    for run in ["a", "b"] {
        let out = coring(
            &[
                "simulate",
                "--config",
                "run.json",
                "--sediment",
                "silt",
                "--out-dir",
                run,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "silt_summary.csv"));
    for n in &names {
        let a = fs::read(dir.path().join("a").join(n)).unwrap();
        let b = fs::read(dir.path().join("b").join(n)).unwrap();
        assert_eq!(a, b, "{n:?} differs");
    }
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), r#"{"sed": 1}"#).unwrap();
    let out = coring(&["simulate", "--config", "run.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn anova_on_simulated_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"dt": 0.005, "replicates": 2}"#,
    )
    .unwrap();
    let out = coring(
        &[
            "simulate",
            "--config",
            "run.json",
            "--sediment",
            "coarse_sand",
            "--out-dir",
            "sim",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let out = coring(
        &["anova", "sim/coarse_sand_summary.csv", "--out-dir", "stats"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let anova = fs::read_to_string(dir.path().join("stats/anova.csv")).unwrap();
    let sources: Vec<&str> = anova
        .lines()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        sources,
        [
            ANOVA_HEADER.split(',').next().unwrap(),
            "A",
            "B",
            "AB",
            "error"
        ]
    );
    let cmp = fs::read_to_string(dir.path().join("stats/comparison.csv")).unwrap();
    assert_eq!(cmp.lines().next(), Some(COMPARISON_HEADER));
    // 20 step-1 patterns give 190 pairs.
    assert_eq!(cmp.lines().count(), 191);
}
