//! Gevrey order estimation `|aₙ| ≈ C Aⁿ Γ(1 + n/k)` from coefficient ratios.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Fewest nonzero coefficients accepted.
pub const MIN_COEFFS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GevreyFit {
    /// Estimated `1/k`; zero for convergent series.
    pub k_inverse: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// RMS residual of the log-ratio regression.
    pub fit_residual: f64,
    /// Slope within 0.05 of zero and ratios bounded.
    pub convergent: bool,
    /// Ratio points used in the regression.
    pub points: usize,
}

/// Fits `log|a_{n+1}/aₙ| ≈ log A + κ log(n+1)` over the tail half of the nonzero coefficients.
///
/// Zero coefficients are skipped: only pairs of consecutive nonzero entries enter the fit.
pub fn gevrey_fit(coeffs: &[f64]) -> Result<GevreyFit> {
    let nonzero: Vec<usize> = (0..coeffs.len()).filter(|&n| coeffs[n] != 0.0 && coeffs[n].is_finite()).collect();
    if nonzero.len() < MIN_COEFFS {
        return Err(Error::Invalid(format!(
            "Gevrey fit needs at least {MIN_COEFFS} nonzero coefficients, got {}",
            nonzero.len()
        )));
    }
    let start = nonzero[nonzero.len() / 2];
    let pts: Vec<(f64, f64)> = (start..coeffs.len().saturating_sub(1))
        .filter(|&n| coeffs[n] != 0.0 && coeffs[n + 1] != 0.0 && coeffs[n + 1].is_finite())
        .map(|n| (((n + 1) as f64).ln(), (coeffs[n + 1] / coeffs[n]).abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Invalid("too few consecutive nonzero pairs in the tail".into()));
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let fit_residual = (pts.iter().map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    let k_inverse = slope.max(0.0);
    let a = icpt.exp();
    // C from the mean of log|aₙ| − n log A − log Γ(1 + κn) over the fitted range.
    let tail: Vec<usize> = nonzero.iter().copied().filter(|&n| n >= start).collect();
    let log_c = tail
        .iter()
        .map(|&n| coeffs[n].abs().ln() - n as f64 * icpt - ln_gamma(1.0 + k_inverse * n as f64))
        .sum::<f64>()
        / tail.len() as f64;
    let max_ratio = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(GevreyFit {
        k_inverse,
        a,
        c: log_c.exp(),
        fit_residual,
        convergent: slope.abs() < 0.05 && max_ratio.is_finite(),
        points: pts.len(),
    })
}

/// [`gevrey_fit`] of `n ↦ max |coefficient|` over the orders of `var`.
pub fn gevrey_fit_series(s: &TruncatedSeries, var: &str) -> Result<GevreyFit> {
    let d = s.var_index(var)?;
    let mut mags = vec![0.0f64; s.trunc()[d] + 1];
    for (e, c) in s.terms() {
        mags[e[d]] = mags[e[d]].max(c.abs());
    }
    gevrey_fit(&mags)
}
