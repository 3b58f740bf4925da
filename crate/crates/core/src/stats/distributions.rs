//! Distribution functions needed by the tests in this module.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::quadrature::gl16;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail `P(F > f)` of the F distribution with `(d1, d2)` degrees of
/// freedom, through the regularized incomplete beta function.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    assert!(d1 > 0.0 && d2 > 0.0, "degrees of freedom must be positive");
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d2 / (d2 + d1 * f);
    beta_reg(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0)
}

/// CDF of the range of `k` independent standard normals.
fn normal_range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let inner = gl16().integrate_composite(-8.5, 8.5, 12, |z| {
        let band = normal_cdf(z) - normal_cdf(z - w);
        normal_pdf(z) * band.max(0.0).powi(km1)
    });
    (k as f64 * inner).clamp(0.0, 1.0)
}

/// CDF of the studentized range `Q` for `k` means and `df` error degrees
/// of freedom. `df = ∞` gives the range of standard normals.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs at least two means");
    assert!(df > 0.0, "degrees of freedom must be positive");
    if q.is_nan() {
        return f64::NAN;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    if !df.is_finite() || df > 1e6 {
        return normal_range_cdf(q, k);
    }
    // Mix over the scale s = sqrt(chi2_df / df).
    let half = df / 2.0;
    let log_norm = half * df.ln() - (half - 1.0) * 2f64.ln() - ln_gamma(half);
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (log_norm + (df - 1.0) * s.ln() - half * s * s).exp()
    };
    let mode = if df > 1.0 {
        ((df - 1.0) / df).sqrt()
    } else {
        0.0
    };
    let spread = 1.0 / (2.0 * df).sqrt();
    let lo = (mode - 14.0 * spread).max(0.0);
    let hi = mode + 14.0 * spread + if df < 4.0 { 4.0 } else { 0.0 };
    gl16()
        .integrate_composite(lo, hi, 16, |s| density(s) * normal_range_cdf(q * s, k))
        .clamp(0.0, 1.0)
}

/// Upper tail of the studentized range.
pub fn studentized_range_survival(q: f64, k: usize, df: f64) -> f64 {
    (1.0 - studentized_range_cdf(q, k, df)).clamp(0.0, 1.0)
}
