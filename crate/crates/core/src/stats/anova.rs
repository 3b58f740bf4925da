//! Balanced two-way fixed-effects ANOVA with interaction.

use serde::Serialize;

use super::distributions::f_survival;
use super::{Result, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    pub levels_a: usize,
    pub levels_b: usize,
    pub replicates: usize,
    pub ss_a: f64,
    pub ss_b: f64,
    pub ss_ab: f64,
    pub ss_error: f64,
    pub ss_total: f64,
    pub df_a: usize,
    pub df_b: usize,
    pub df_ab: usize,
    pub df_error: usize,
    pub f_a: f64,
    pub f_b: f64,
    pub f_ab: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
}

/// One line of the ANOVA table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaLine {
    pub source: &'static str,
    pub ss: f64,
    pub df: usize,
    pub f: Option<f64>,
    pub p: Option<f64>,
}

impl AnovaResult {
    pub fn lines(&self) -> [AnovaLine; 4] {
        [
            AnovaLine {
                source: "A",
                ss: self.ss_a,
                df: self.df_a,
                f: Some(self.f_a),
                p: Some(self.p_a),
            },
            AnovaLine {
                source: "B",
                ss: self.ss_b,
                df: self.df_b,
                f: Some(self.f_b),
                p: Some(self.p_b),
            },
            AnovaLine {
                source: "AB",
                ss: self.ss_ab,
                df: self.df_ab,
                f: Some(self.f_ab),
                p: Some(self.p_ab),
            },
            AnovaLine {
                source: "error",
                ss: self.ss_error,
                df: self.df_error,
                f: None,
                p: None,
            },
        ]
    }

    pub fn ms_error(&self) -> f64 {
        self.ss_error / self.df_error as f64
    }
}

/// `cells[i][j]` holds the replicate responses at level `i` of factor A and
/// level `j` of factor B.
///
/// Sums of squares are formed from deviations about the cell, level and
/// grand means. When the error mean square is zero an effect with zero sum
/// of squares reports `F = 0, p = 1`, and a non-zero one `F = ∞, p = 0`.
pub fn two_way_anova(cells: &[Vec<Vec<f64>>]) -> Result<AnovaResult> {
    let a = cells.len();
    if a < 2 {
        return Err(StatsError::Design(format!(
            "factor A needs >= 2 levels, got {a}"
        )));
    }
    let b = cells[0].len();
    if b < 2 {
        return Err(StatsError::Design(format!(
            "factor B needs >= 2 levels, got {b}"
        )));
    }
    let n = cells[0].first().map(Vec::len).unwrap_or(0);
    if n < 2 {
        return Err(StatsError::Design(
            "need >= 2 replicates per cell for an error term".into(),
        ));
    }
    for (i, row) in cells.iter().enumerate() {
        if row.len() != b {
            return Err(StatsError::Design(format!(
                "unbalanced design: level {i} of A has {} levels of B, expected {b}",
                row.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            if cell.len() != n {
                return Err(StatsError::Design(format!(
                    "unbalanced design: cell ({i}, {j}) has {} replicates, expected {n}",
                    cell.len()
                )));
            }
            if cell.iter().any(|y| !y.is_finite()) {
                return Err(StatsError::NonFinite);
            }
        }
    }

    let nf = n as f64;
    let total_n = (a * b * n) as f64;
    let cell_mean: Vec<Vec<f64>> = cells
        .iter()
        .map(|row| row.iter().map(|c| c.iter().sum::<f64>() / nf).collect())
        .collect();
    let grand = cell_mean.iter().flatten().sum::<f64>() / (a * b) as f64;
    let mean_a: Vec<f64> = cell_mean
        .iter()
        .map(|row| row.iter().sum::<f64>() / b as f64)
        .collect();
    let mean_b: Vec<f64> = (0..b)
        .map(|j| cell_mean.iter().map(|row| row[j]).sum::<f64>() / a as f64)
        .collect();

    let ss_a = (b * n) as f64 * mean_a.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_b = (a * n) as f64 * mean_b.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_ab = 0.0;
    let mut ss_error = 0.0;
    let mut ss_total = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..a {
        for j in 0..b {
            let m = cell_mean[i][j];
            ss_ab += nf * (m - mean_a[i] - mean_b[j] + grand).powi(2);
            for y in &cells[i][j] {
                ss_error += (y - m).powi(2);
                ss_total += (y - grand).powi(2);
                sum_sq += y * y;
            }
        }
    }
    let _ = total_n;

    // Round-off floor: sums of squares below it are indistinguishable from 0.
    let floor = 64.0 * f64::EPSILON * sum_sq;
    let snap = |x: f64| if x <= floor { 0.0 } else { x };
    let (ss_a, ss_b, ss_ab, ss_error, ss_total) = (
        snap(ss_a),
        snap(ss_b),
        snap(ss_ab),
        snap(ss_error),
        snap(ss_total),
    );

    let df_a = a - 1;
    let df_b = b - 1;
    let df_ab = df_a * df_b;
    let df_error = a * b * (n - 1);
    let ms_error = ss_error / df_error as f64;
    let test = |ss: f64, df: usize| -> (f64, f64) {
        if ms_error == 0.0 {
            if ss == 0.0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY, 0.0)
            }
        } else {
            let f = (ss / df as f64) / ms_error;
            (f, f_survival(f, df as f64, df_error as f64))
        }
    };
    let (f_a, p_a) = test(ss_a, df_a);
    let (f_b, p_b) = test(ss_b, df_b);
    let (f_ab, p_ab) = test(ss_ab, df_ab);

    Ok(AnovaResult {
        levels_a: a,
        levels_b: b,
        replicates: n,
        ss_a,
        ss_b,
        ss_ab,
        ss_error,
        ss_total,
        df_a,
        df_b,
        df_ab,
        df_error,
        f_a,
        f_b,
        f_ab,
        p_a,
        p_b,
        p_ab,
    })
}
