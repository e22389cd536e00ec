//! Log-scale slope fits for `(ε, value)` samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, precondition, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// Weight `log₂(1/ε)`: finer scales count more.
    #[default]
    LogInverseEps,
    /// Weight `1/log₂(1/ε)`.
    InverseLog,
}

impl Weighting {
    fn weight(self, x: f64) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::LogInverseEps => x,
            Weighting::InverseLog => 1.0 / x,
        }
    }
}

/// Slope of `value` against `log₂(1/ε)` with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% band on the slope from the weighted residual variance.
    pub band: (f64, f64),
    pub residuals: Vec<f64>,
    /// `value / log₂(1/ε)` at the finest ε.
    pub finest_ratio: f64,
    pub weighting: Weighting,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
}

/// Minimum ε-span, as a ratio `max ε / min ε`, accepted by [`fit_slope`].
pub const MIN_SPAN: f64 = 2.0;

/// Weighted least-squares line through `(log₂(1/ε), value)`.
pub fn fit_slope(eps: &[f64], values: &[f64], weighting: Weighting) -> Result<DimensionEstimate> {
    if eps.len() != values.len() {
        return invalid("eps and value lists differ in length");
    }
    if eps.len() < 3 {
        return precondition(format!("need at least 3 points, got {}", eps.len()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return invalid("every ε must lie in (0,1)");
    }
    let hi = eps.iter().copied().fold(f64::MIN, f64::max);
    let lo = eps.iter().copied().fold(f64::MAX, f64::min);
    if hi / lo < MIN_SPAN * (1.0 - 1e-12) {
        return precondition(format!("ε range [{lo}, {hi}] spans less than a factor {MIN_SPAN}"));
    }
    let xs: Vec<f64> = eps.iter().map(|e| -e.log2()).collect();
    let ws: Vec<f64> = xs.iter().map(|&x| weighting.weight(x)).collect();
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = values.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(values)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    if sxx <= 0.0 {
        return precondition("ε values are all equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(values).map(|(x, y)| y - (intercept + slope * x)).collect();
    let n = xs.len() as f64;
    let ssr: f64 = residuals.iter().zip(&ws).map(|(r, w)| w * r * r).sum();
    // Weights normalized to mean 1 so the variance estimate is scale-free.
    let stderr = ((ssr * n / sw) / (n - 2.0) / (sxx * n / sw)).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    let i_fine = eps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(DimensionEstimate {
        slope,
        intercept,
        stderr,
        band: (slope - t * stderr, slope + t * stderr),
        residuals,
        finest_ratio: values[i_fine] / xs[i_fine],
        weighting,
        eps: eps.to_vec(),
        values: values.to_vec(),
    })
}

/// `ε = 2^{-j/2}` for `j = j_lo..=j_hi`.
pub fn half_octave_grid(j_lo: u32, j_hi: u32) -> Vec<f64> {
    (j_lo..=j_hi).map(|j| 2f64.powf(-(j as f64) / 2.0)).collect()
}
