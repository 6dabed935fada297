//! Input sample and evaluation settings.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, ensure_finite, Error, Result};
use crate::variance::bandwidth_rule;

/// Smallest sample that still leaves a non-empty, splittable evaluation window.
pub const MIN_SAMPLE_SIZE: usize = 8;

/// How predictor rows line up with the predictand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PredictorTiming {
    /// Row `t` of the predictors is observed at the same date as `y[t]`; the
    /// forecast engine lags it once, regressing `y[s]` on `x[s-1]`.
    #[default]
    Contemporaneous,
    /// Row `t` already holds the predictor value dated one period before
    /// `y[t]`; the engine regresses `y[s]` on `x[s]`.
    Lagged,
}

/// Predictand plus a pool of candidate predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample {
    y: Vec<f64>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    timing: PredictorTiming,
}

impl SeriesSample {
    /// `columns[j]` is predictor `j` over time; every column must have `y.len()`
    /// entries.
    pub fn new(
        y: Vec<f64>,
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        timing: PredictorTiming,
    ) -> Result<Self> {
        let n = y.len();
        if n < MIN_SAMPLE_SIZE {
            return Err(config_err(format!(
                "sample size {n} is below the minimum of {MIN_SAMPLE_SIZE}"
            )));
        }
        if columns.is_empty() {
            return Err(config_err("at least one predictor is required"));
        }
        if names.len() != columns.len() {
            return Err(config_err(format!(
                "{} names supplied for {} predictors",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::with_capacity(names.len());
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(config_err(format!("duplicate predictor name {name:?}")));
            }
        }
        ensure_finite(&y, "predictand")?;
        for (col, name) in columns.iter().zip(&names) {
            if col.len() != n {
                return Err(config_err(format!(
                    "predictor {name:?} has {} observations, predictand has {n}",
                    col.len()
                )));
            }
            ensure_finite(col, &format!("predictor {name:?}"))?;
        }
        Ok(Self {
            y,
            columns,
            names,
            timing,
        })
    }

    /// Convenience constructor naming predictors `x1..xp`.
    pub fn unnamed(y: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("x{j}")).collect();
        Self::new(y, columns, names, PredictorTiming::Contemporaneous)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn timing(&self) -> PredictorTiming {
        self.timing
    }
}

/// Which residuals feed the long-run variance normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum VarianceSource {
    /// Benchmark errors, one normalizer shared by all predictors.
    Null,
    /// Each predictor's own forecast errors.
    #[default]
    Alternative,
    /// Newey-West weighted version of [`VarianceSource::Null`].
    NeweyWestNull,
    /// Newey-West weighted version of [`VarianceSource::Alternative`].
    NeweyWestAlternative,
}

impl VarianceSource {
    pub fn is_newey_west(self) -> bool {
        matches!(self, Self::NeweyWestNull | Self::NeweyWestAlternative)
    }

    pub fn uses_benchmark_errors(self) -> bool {
        matches!(self, Self::Null | Self::NeweyWestNull)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Null => "null",
            Self::Alternative => "alt",
            Self::NeweyWestNull => "nw-null",
            Self::NeweyWestAlternative => "nw-alt",
        }
    }
}

impl fmt::Display for VarianceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VarianceSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" => Ok(Self::Null),
            "alt" | "alternative" => Ok(Self::Alternative),
            "nw-null" => Ok(Self::NeweyWestNull),
            "nw-alt" => Ok(Self::NeweyWestAlternative),
            other => Err(config_err(format!(
                "unknown variance source {other:?} (expected null, alt, nw-null or nw-alt)"
            ))),
        }
    }
}

/// Checks that the split fraction keeps the numerator variance non-degenerate.
pub fn validate_mu0(mu0: f64) -> Result<()> {
    if !mu0.is_finite() || mu0 <= 0.0 || mu0 >= 1.0 {
        return Err(config_err(format!("mu0 = {mu0} must lie strictly inside (0, 1)")));
    }
    if mu0 == 0.5 {
        return Err(config_err(
            "mu0 = 0.5 makes the split-sample MSE identical to the full-sample MSE, \
             so the statistic's variance degenerates to zero",
        ));
    }
    Ok(())
}

/// Tuning inputs plus the window sizes derived from them.
///
/// `k0 = floor(n * pi0)` observations precede the first forecast and the
/// evaluation window of `n - k0` forecasts is split after
/// `m0 = floor((n - k0) * mu0)` of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    n: usize,
    pi0: f64,
    mu0: f64,
    variance_source: VarianceSource,
    bandwidth: Option<usize>,
    k0: usize,
    m0: usize,
}

impl EvalConfig {
    pub fn new(
        n: usize,
        pi0: f64,
        mu0: f64,
        variance_source: VarianceSource,
        bandwidth: Option<usize>,
    ) -> Result<Self> {
        if !pi0.is_finite() || pi0 <= 0.0 || pi0 >= 1.0 {
            return Err(config_err(format!("pi0 = {pi0} must lie strictly inside (0, 1)")));
        }
        validate_mu0(mu0)?;
        let k0 = (n as f64 * pi0).floor() as usize;
        if k0 < 2 {
            return Err(config_err(format!(
                "k0 = floor({n} * {pi0}) = {k0}; at least two observations must precede the first forecast"
            )));
        }
        if k0 >= n {
            return Err(config_err(format!("k0 = {k0} leaves no evaluation window for n = {n}")));
        }
        let window = n - k0;
        let m0 = (window as f64 * mu0).floor() as usize;
        if m0 < 1 || m0 + 1 > window {
            return Err(config_err(format!(
                "split point m0 = {m0} must satisfy 1 <= m0 <= {} for an evaluation window of {window}",
                window - 1
            )));
        }
        if let Some(m) = bandwidth {
            if m >= window {
                return Err(config_err(format!(
                    "bandwidth {m} must be smaller than the evaluation window {window}"
                )));
            }
        }
        Ok(Self {
            n,
            pi0,
            mu0,
            variance_source,
            bandwidth,
            k0,
            m0,
        })
    }

    /// Default settings: alternative-residual normalizer, rule-of-thumb bandwidth.
    pub fn with_defaults(n: usize, pi0: f64, mu0: f64) -> Result<Self> {
        Self::new(n, pi0, mu0, VarianceSource::default(), None)
    }

    /// Same sample size and window, different split fraction.
    pub fn with_mu0(&self, mu0: f64) -> Result<Self> {
        Self::new(self.n, self.pi0, mu0, self.variance_source, self.bandwidth)
    }

    pub fn with_variance_source(&self, source: VarianceSource) -> Self {
        Self {
            variance_source: source,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    /// Number of out-of-sample forecasts, `n - k0`.
    pub fn window(&self) -> usize {
        self.n - self.k0
    }

    pub fn variance_source(&self) -> VarianceSource {
        self.variance_source
    }

    pub fn bandwidth(&self) -> Option<usize> {
        self.bandwidth
    }

    /// Lag truncation for the Newey-West flavors: the explicit bandwidth, or
    /// the rule of thumb. Zero for the plain estimators.
    pub fn effective_bandwidth(&self) -> usize {
        if !self.variance_source.is_newey_west() {
            return 0;
        }
        self.bandwidth
            .unwrap_or_else(|| bandwidth_rule(self.n, self.k0))
    }
}
