//! Long-run variance of the pairwise statistic's numerator.
//!
//! Under the null the numerator has long-run variance
//! `omega^2 = (1 - 2 mu0)^2 / (4 mu0 (1 - mu0)) * phi^2`, with `phi^2` the
//! long-run variance of the demeaned squared forecast errors. The estimators
//! here differ only in which errors feed `phi^2` and whether autocovariances
//! are added.

use serde::Serialize;

use crate::config::{validate_mu0, VarianceSource};
use crate::error::{config_err, ensure_finite, Result};
use crate::numeric::{mean, sum};

/// `(1 - 2 mu0)^2 / (4 mu0 (1 - mu0))`. Errors for `mu0` in `{0, 1/2, 1}` or
/// outside `(0, 1)`.
pub fn split_factor(mu0: f64) -> Result<f64> {
    validate_mu0(mu0)?;
    let d = 1.0 - 2.0 * mu0;
    Ok(d * d / (4.0 * mu0 * (1.0 - mu0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrvEstimate {
    pub omega_sq: f64,
    pub phi_sq: f64,
    pub factor: f64,
    pub source: VarianceSource,
    pub bandwidth_used: usize,
    /// The weighted autocovariance sum was negative and has been set to zero.
    pub floored: bool,
}

impl LrvEstimate {
    pub fn omega(&self) -> f64 {
        self.omega_sq.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.omega_sq > 0.0)
    }
}

/// Plain estimator from the benchmark errors.
pub fn lrv_null(e0: &[f64], mu0: f64) -> Result<LrvEstimate> {
    estimate_lrv(e0, mu0, VarianceSource::Null, 0)
}

/// Plain estimator from one model's errors.
pub fn lrv_alt(ej: &[f64], mu0: f64) -> Result<LrvEstimate> {
    estimate_lrv(ej, mu0, VarianceSource::Alternative, 0)
}

/// Weighted autocovariance estimator with lag truncation `m`. The result is
/// tagged [`VarianceSource::NeweyWestAlternative`]; use [`estimate_lrv`] to
/// tag it as the null flavor.
pub fn lrv_neweywest(errors: &[f64], mu0: f64, m: usize) -> Result<LrvEstimate> {
    estimate_lrv(errors, mu0, VarianceSource::NeweyWestAlternative, m)
}

/// Shared implementation. `m = 0` gives the plain estimator for any source.
///
/// `phi^2 = sum_{|s| <= m} (1 - |s|/N) gamma(s)` with
/// `gamma(s) = sum_t eta_t eta_{t-s} / N`, `eta` the squared errors minus their
/// window mean and `N` the window length.
pub fn estimate_lrv(
    errors: &[f64],
    mu0: f64,
    source: VarianceSource,
    m: usize,
) -> Result<LrvEstimate> {
    let factor = split_factor(mu0)?;
    if errors.is_empty() {
        return Err(config_err("cannot estimate a long-run variance from an empty error sequence"));
    }
    if m >= errors.len() {
        return Err(config_err(format!(
            "bandwidth {m} must be smaller than the error sequence length {}",
            errors.len()
        )));
    }
    ensure_finite(errors, "forecast errors")?;
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let center = mean(&sq);
    let eta: Vec<f64> = sq.iter().map(|s| s - center).collect();
    let len = eta.len() as f64;
    let autocov = |lag: usize| sum(eta[lag..].iter().zip(&eta).map(|(a, b)| a * b)) / len;

    let mut phi_sq = autocov(0);
    for lag in 1..=m {
        phi_sq += 2.0 * (1.0 - lag as f64 / len) * autocov(lag);
    }
    let floored = phi_sq < 0.0;
    if floored {
        phi_sq = 0.0;
    }
    Ok(LrvEstimate {
        omega_sq: factor * phi_sq,
        phi_sq,
        factor,
        source,
        bandwidth_used: m,
        floored,
    })
}

/// Rule-of-thumb lag truncation `floor(0.75 (n - k0)^(1/3))`.
pub fn bandwidth_rule(n: usize, k0: usize) -> usize {
    let window = n.saturating_sub(k0) as f64;
    (0.75 * window.cbrt()).floor().max(0.0) as usize
}
