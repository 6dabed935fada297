//! Pairwise sample-split statistics, the power-enhanced variant and their
//! aggregates.
//!
//! For predictor `j` the statistic compares a split-sample estimate of the
//! benchmark MSE (the average of the MSEs over the first `m0` forecasts and
//! over the remaining ones) with model `j`'s full-window MSE, scaled by
//! `sqrt(N) / omega`. Because the benchmark MSE is estimated differently from
//! model `j`'s, the numerator keeps a non-degenerate variance even though the
//! two models coincide under the null. Averaging over `j` gives a statistic
//! that is standard normal under the null; the test rejects in the right tail.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::config::EvalConfig;
use crate::error::{config_err, ensure_finite, Error, Result};
use crate::forecast::ForecastErrorPanel;
use crate::numeric::{mean, sum};
use crate::variance::{estimate_lrv, LrvEstimate};

/// `(mean(sq[..m0]) + mean(sq[m0..])) / 2`.
pub fn split_mse(sq_errors: &[f64], m0: usize) -> Result<f64> {
    let len = sq_errors.len();
    if m0 < 1 || m0 >= len {
        return Err(config_err(format!(
            "split point m0 = {m0} must satisfy 1 <= m0 <= {} ",
            len.saturating_sub(1)
        )));
    }
    Ok(0.5 * (mean(&sq_errors[..m0]) + mean(&sq_errors[m0..])))
}

fn check_normalizer(omega: &LrvEstimate) -> Result<f64> {
    if omega.is_degenerate() || !omega.omega_sq.is_finite() {
        return Err(Error::Data(format!(
            "degenerate long-run variance estimate (omega^2 = {})",
            omega.omega_sq
        )));
    }
    Ok(omega.omega())
}

fn check_pair(e0: &[f64], ej: &[f64]) -> Result<()> {
    if e0.len() != ej.len() {
        return Err(config_err(format!(
            "error sequences differ in length ({} vs {})",
            e0.len(),
            ej.len()
        )));
    }
    ensure_finite(e0, "benchmark errors")?;
    ensure_finite(ej, "model errors")
}

/// Pairwise statistic from squared errors, `sqrt(N)/omega * (split_mse(sq0) - mean(sqj))`.
///
/// Taking squares directly lets callers substitute adjusted squared errors.
pub fn pairwise_stat_from_squares(
    sq0: &[f64],
    sqj: &[f64],
    m0: usize,
    omega: &LrvEstimate,
) -> Result<f64> {
    if sq0.len() != sqj.len() {
        return Err(config_err("squared error sequences differ in length"));
    }
    let omega = check_normalizer(omega)?;
    let numerator = split_mse(sq0, m0)? - mean(sqj);
    Ok((sq0.len() as f64).sqrt() / omega * numerator)
}

/// Pairwise statistic for benchmark errors `e0` against model errors `ej`.
/// Positive when model `j` beats the split benchmark MSE.
pub fn pairwise_stat(e0: &[f64], ej: &[f64], m0: usize, omega: &LrvEstimate) -> Result<f64> {
    check_pair(e0, ej)?;
    let sq0: Vec<f64> = e0.iter().map(|e| e * e).collect();
    let sqj: Vec<f64> = ej.iter().map(|e| e * e).collect();
    pairwise_stat_from_squares(&sq0, &sqj, m0, omega)
}

/// Power-enhancement term `sqrt(N) * mean((e0 - ej)^2) / omega`; zero exactly
/// when the two forecasts coincide.
pub fn enhancement_term(e0: &[f64], ej: &[f64], omega: &LrvEstimate) -> Result<f64> {
    check_pair(e0, ej)?;
    let omega = check_normalizer(omega)?;
    let gap = sum(e0.iter().zip(ej).map(|(a, b)| (a - b) * (a - b))) / e0.len() as f64;
    Ok((e0.len() as f64).sqrt() * gap / omega)
}

/// Upper-tail standard normal probability `1 - Phi(x)`, computed through
/// `erfc` so that it stays accurate far into the right tail.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Right-tail p-value of a standard normal statistic.
pub fn pvalue(stat: f64) -> Result<f64> {
    if !stat.is_finite() {
        return Err(Error::NonFinite("test statistic".into()));
    }
    Ok(normal_upper_tail(stat).clamp(0.0, 1.0))
}

/// One-sided critical value `Phi^{-1}(1 - nominal)`; `-inf` for `nominal = 1`.
pub fn critical_value(nominal: f64) -> Result<f64> {
    if !(nominal > 0.0 && nominal <= 1.0) {
        return Err(config_err(format!("nominal size {nominal} must lie in (0, 1]")));
    }
    if nominal == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(1.0 - nominal))
}

/// Per-predictor and aggregate statistics for one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseStats {
    pub names: Vec<String>,
    pub d_raw: Vec<f64>,
    pub enhancement: Vec<f64>,
    pub d_enhanced: Vec<f64>,
    pub aggregate_raw: f64,
    pub aggregate_enhanced: f64,
    pub pvalue_raw: f64,
    pub pvalue_enhanced: f64,
    pub config: EvalConfig,
    /// Normalizer used for each predictor. Identical entries for the null
    /// flavors, which share one estimate.
    pub omega: Vec<LrvEstimate>,
}

impl PairwiseStats {
    pub fn p(&self) -> usize {
        self.d_raw.len()
    }

    pub fn aggregate(&self, enhanced: bool) -> f64 {
        if enhanced {
            self.aggregate_enhanced
        } else {
            self.aggregate_raw
        }
    }

    pub fn pvalue(&self, enhanced: bool) -> f64 {
        if enhanced {
            self.pvalue_enhanced
        } else {
            self.pvalue_raw
        }
    }
}

/// Computes every pairwise statistic, its enhancement and the aggregates.
///
/// The normalizer follows `config.variance_source()`: the null flavors use one
/// estimate from the benchmark errors for every predictor, the alternative
/// flavors one estimate per predictor from its own errors.
pub fn aggregate_stats(panel: &ForecastErrorPanel, config: &EvalConfig) -> Result<PairwiseStats> {
    if panel.len() != config.window() {
        return Err(config_err(format!(
            "panel has {} forecasts but the configuration expects {}",
            panel.len(),
            config.window()
        )));
    }
    let m0 = config.m0();
    let mu0 = config.mu0();
    let source = config.variance_source();
    let bandwidth = config.effective_bandwidth();
    let root_n = (panel.len() as f64).sqrt();

    let e0 = panel.e0();
    let sq0: Vec<f64> = e0.iter().map(|e| e * e).collect();
    let benchmark_mse = split_mse(&sq0, m0)?;
    let shared = if source.uses_benchmark_errors() {
        Some(estimate_lrv(e0, mu0, source, bandwidth)?)
    } else {
        None
    };

    let per_predictor: Vec<(f64, f64, LrvEstimate)> = (0..panel.p())
        .into_par_iter()
        .map(|j| {
            let ej = panel.column(j);
            let omega = match &shared {
                Some(est) => est.clone(),
                None => estimate_lrv(ej, mu0, source, bandwidth)?,
            };
            if omega.is_degenerate() {
                return Err(Error::DegenerateNormalizer {
                    index: j,
                    name: panel.names()[j].clone(),
                });
            }
            let scale = root_n / omega.omega();
            let model_mse = sum(ej.iter().map(|e| e * e)) / ej.len() as f64;
            let gap = sum(e0.iter().zip(ej).map(|(a, b)| (a - b) * (a - b))) / ej.len() as f64;
            Ok((scale * (benchmark_mse - model_mse), scale * gap, omega))
        })
        .collect::<Result<_>>()?;

    let mut d_raw = Vec::with_capacity(panel.p());
    let mut enhancement = Vec::with_capacity(panel.p());
    let mut omega = Vec::with_capacity(panel.p());
    for (d, enh, est) in per_predictor {
        d_raw.push(d);
        enhancement.push(enh);
        omega.push(est);
    }
    let d_enhanced: Vec<f64> = d_raw.iter().zip(&enhancement).map(|(d, e)| d + e).collect();
    let aggregate_raw = mean(&d_raw);
    let aggregate_enhanced = mean(&d_enhanced);
    Ok(PairwiseStats {
        names: panel.names().to_vec(),
        pvalue_raw: pvalue(aggregate_raw)?,
        pvalue_enhanced: pvalue(aggregate_enhanced)?,
        d_raw,
        enhancement,
        d_enhanced,
        aggregate_raw,
        aggregate_enhanced,
        config: config.clone(),
        omega,
    })
}
