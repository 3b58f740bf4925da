use coring::kinematics::{CoreGeometry, PatternKind, PatternSpec};
use coring::penetration::{
    simulate_trial, ForceProfile, SedimentSpec, Termination, TrialConfig, TrialRecord,
};

fn patterns() -> Vec<PatternSpec> {
    vec![
        PatternSpec::linear(15.0).unwrap(),
        PatternSpec::linear(38.0).unwrap(),
        PatternSpec::helical(22.0, 6.0).unwrap(),
        PatternSpec::helical(38.0, 12.0).unwrap(),
        PatternSpec::zigzag(29.0, 12.0, 10.0).unwrap(),
        PatternSpec::zigzag(38.0, 12.0, 50.0).unwrap(),
    ]
}

fn run(p: &PatternSpec, sed: &SedimentSpec, cfg: &TrialConfig) -> TrialRecord {
    simulate_trial(7, p, sed, &CoreGeometry::default(), cfg).unwrap()
}

#[test]
fn work_is_trapezoid_over_samples() {
    let cfg = TrialConfig::default();
    for sed in SedimentSpec::presets() {
        for p in patterns() {
            let t = run(&p, &sed, &cfg);
            assert!(t.work >= 0.0);
            let trapezoid: f64 = t
                .samples
                .windows(2)
                .map(|w| 0.5 * (w[0].force + w[1].force) * (w[1].travel - w[0].travel))
                .sum();
            assert!(
                (trapezoid - t.work).abs() <= 1e-9 * t.work.max(1.0),
                "{} {p}: {trapezoid} vs {}",
                sed.name,
                t.work
            );
            let last = t.samples.last().unwrap();
            assert_eq!(last.travel, t.travel);
            assert_eq!(last.t, t.duration);
            assert_eq!(-last.z, t.depth);
        }
    }
}

#[test]
fn samples_are_monotone() {
    let t = run(
        &PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap(),
        &SedimentSpec::silt(),
        &TrialConfig::default(),
    );
    for w in t.samples.windows(2) {
        assert!(w[1].t > w[0].t);
        assert!(w[1].z <= w[0].z);
        assert!(w[1].travel >= w[0].travel);
    }
}

#[test]
fn trials_are_reproducible() {
    let cfg = TrialConfig {
        seed: 99,
        ..TrialConfig::default()
    };
    let sed = SedimentSpec::medium_sand();
    for p in patterns() {
        assert_eq!(run(&p, &sed, &cfg), run(&p, &sed, &cfg));
    }
    let other = TrialConfig { seed: 100, ..cfg };
    let p = PatternSpec::helical(29.0, 12.0).unwrap();
    assert_ne!(run(&p, &sed, &cfg).mass_g, run(&p, &sed, &other).mass_g);
}

#[test]
fn work_bounded_by_applied_force() {
    let cfg = TrialConfig {
        external_force: ForceProfile::Ramp {
            rate_n_per_s: 60.0,
            limit_n: 400.0,
        },
        ..TrialConfig::default()
    };
    for p in patterns() {
        let t = run(&p, &SedimentSpec::coarse_sand(), &cfg);
        let applied: f64 = t
            .samples
            .windows(2)
            .map(|w| {
                0.5 * (cfg.external_force.at(w[0].t) + cfg.external_force.at(w[1].t))
                    * (w[1].travel - w[0].travel)
            })
            .sum();
        assert!(t.work <= applied + 1e-9, "{p}: {} > {applied}", t.work);
    }
}

#[test]
fn linear_patterns_stall_in_coarse_sand() {
    let t = run(
        &PatternSpec::linear(38.0).unwrap(),
        &SedimentSpec::coarse_sand(),
        &TrialConfig::default(),
    );
    assert_eq!(t.terminated_by, Termination::Stalled);
    assert!(t.depth < 200.0);
}

#[test]
fn zigzag_outperforms_helical_everywhere() {
    let cfg = TrialConfig {
        mass_noise: 0.0,
        ..TrialConfig::default()
    };
    for sed in SedimentSpec::presets() {
        let h = run(&PatternSpec::helical(38.0, 12.0).unwrap(), &sed, &cfg);
        let z = run(&PatternSpec::zigzag(38.0, 12.0, 30.0).unwrap(), &sed, &cfg);
        assert!(
            z.mass_g > h.mass_g,
            "{}: {} <= {}",
            sed.name,
            z.mass_g,
            h.mass_g
        );
        assert_eq!(z.pattern.kind(), PatternKind::ZigZag);
    }
}

#[test]
fn invalid_config_rejected() {
    let cfg = TrialConfig {
        dt: 0.0,
        ..TrialConfig::default()
    };
    let p = PatternSpec::linear(15.0).unwrap();
    assert!(simulate_trial(1, &p, &SedimentSpec::silt(), &CoreGeometry::default(), &cfg).is_err());
    let cfg = TrialConfig {
        target_depth: -1.0,
        ..TrialConfig::default()
    };
    assert!(simulate_trial(1, &p, &SedimentSpec::silt(), &CoreGeometry::default(), &cfg).is_err());
}
