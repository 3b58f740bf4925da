//! Tukey HSD pairwise comparisons for equal-sized groups.

use serde::{Deserialize, Serialize};

use super::distributions::studentized_range_survival;
use super::{Result, StatsError};
use crate::kinematics::PatternSpec;

/// Which direction of the response counts as better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Lower,
    Higher,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub a: PatternSpec,
    pub b: PatternSpec,
    /// mean(a) − mean(b)
    pub mean_diff: f64,
    pub q: f64,
    pub p_adj: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonOutcome {
    pub pairs: Vec<PairComparison>,
    pub means: Vec<(PatternSpec, f64)>,
    pub best: PatternSpec,
    pub selected: Vec<PatternSpec>,
    pub alpha: f64,
    pub ms_error: f64,
    pub df_error: usize,
}

/// All pairwise Tukey HSD tests. The selection is the best-mean group plus
/// every group not significantly different from it, in input order.
///
/// Ties for the best mean go to the earlier group.
pub fn multiple_comparison(
    groups: &[(PatternSpec, Vec<f64>)],
    alpha: f64,
    preference: Preference,
) -> Result<ComparisonOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Alpha(alpha));
    }
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::Design(format!("need >= 2 groups, got {k}")));
    }
    let n = groups[0].1.len();
    if n < 2 {
        return Err(StatsError::Design("need >= 2 replicates per group".into()));
    }
    for (i, (p, ys)) in groups.iter().enumerate() {
        if ys.len() != n {
            return Err(StatsError::Design(format!(
                "group {i} ({p}) has {} replicates, expected {n}",
                ys.len()
            )));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        if groups[..i].iter().any(|(q, _)| q.same_key(p)) {
            return Err(StatsError::Design(format!("duplicate group {p}")));
        }
    }

    let nf = n as f64;
    let means: Vec<f64> = groups
        .iter()
        .map(|(_, ys)| ys.iter().sum::<f64>() / nf)
        .collect();
    let mut ss_within = 0.0;
    let mut sum_sq = 0.0;
    for ((_, ys), m) in groups.iter().zip(&means) {
        for y in ys {
            ss_within += (y - m).powi(2);
            sum_sq += y * y;
        }
    }
    if ss_within <= 64.0 * f64::EPSILON * sum_sq {
        ss_within = 0.0;
    }
    let df_error = k * (n - 1);
    let ms_error = ss_within / df_error as f64;
    let se = (ms_error / nf).sqrt();

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let diff = means[i] - means[j];
            let (q, p_adj) = if se == 0.0 {
                if diff == 0.0 {
                    (0.0, 1.0)
                } else {
                    (f64::INFINITY, 0.0)
                }
            } else {
                let q = diff.abs() / se;
                (q, studentized_range_survival(q, k, df_error as f64))
            };
            pairs.push(PairComparison {
                a: groups[i].0,
                b: groups[j].0,
                mean_diff: diff,
                q,
                p_adj,
                significant: p_adj < alpha,
            });
        }
    }

    let mut best = 0;
    for i in 1..k {
        let better = match preference {
            Preference::Higher => means[i] > means[best],
            Preference::Lower => means[i] < means[best],
        };
        if better {
            best = i;
        }
    }
    let pair_index = |i: usize, j: usize| {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        lo * (2 * k - lo - 1) / 2 + (hi - lo - 1)
    };
    let selected = (0..k)
        .filter(|&i| i == best || !pairs[pair_index(i, best)].significant)
        .map(|i| groups[i].0)
        .collect();

    Ok(ComparisonOutcome {
        pairs,
        means: groups.iter().map(|(p, _)| *p).zip(means).collect(),
        best: groups[best].0,
        selected,
        alpha,
        ms_error,
        df_error,
    })
}
