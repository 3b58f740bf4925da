use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kinematics::{KinematicsError, PatternSpec};

pub const STEP1_FEEDS: [f64; 4] = [15.0, 22.0, 29.0, 38.0];
pub const STEP1_OMEGAS: [f64; 5] = [0.0, 3.0, 6.0, 9.0, 12.0];
pub const STEP2_FREQUENCIES: [f64; 4] = [0.0, 10.0, 30.0, 50.0];

/// Seeded Fisher–Yates shuffle of `0..n`.
pub fn srs_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// The 4 × 5 feed/rotation grid, feed-major. ω = 0 gives linear patterns.
pub fn step1_grid() -> Vec<PatternSpec> {
    let mut out = Vec::with_capacity(STEP1_FEEDS.len() * STEP1_OMEGAS.len());
    for &v in &STEP1_FEEDS {
        for &w in &STEP1_OMEGAS {
            out.push(PatternSpec::from_decision(v, w, 0.0).expect("grid values are valid"));
        }
    }
    out
}

/// Frequency variants of one selected (v, ω) pair; f = 0 is the helical base.
pub fn step2_grid(base: &PatternSpec) -> Result<Vec<PatternSpec>, KinematicsError> {
    STEP2_FREQUENCIES
        .iter()
        .map(|&f| PatternSpec::from_decision(base.feed(), base.omega(), f))
        .collect()
}
