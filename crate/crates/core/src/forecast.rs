//! Recursive expanding-window one-step-ahead forecasts.
//!
//! With `t` observations of the predictand available (`y[0..t]`), the benchmark
//! forecasts `y[t]` by the running mean of `y[0..t]`, and model `j` forecasts it
//! by an OLS fit of the predictand on an intercept and predictor `j` lagged
//! once. Forecasts are issued for `t = k0, ..., n-1`, so every error sequence
//! has `n - k0` entries aligned on the same targets.

use rayon::prelude::*;

use crate::config::{EvalConfig, PredictorTiming, SeriesSample};
use crate::error::{config_err, Result};
use crate::numeric::CompensatedSum;

/// Relative tolerance for declaring the 2x2 normal equations singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Running OLS of `y` on `(1, z)`, updated one pair at a time.
///
/// Keeps means and centered co-moments (Welford updates) rather than raw power
/// sums, so persistent regressors with large levels do not lose the slope to
/// cancellation.
#[derive(Debug, Clone, Default)]
pub struct RecursiveOls {
    count: usize,
    mean_z: f64,
    mean_y: f64,
    szz: f64,
    szy: f64,
}

impl RecursiveOls {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, z: f64, y: f64) {
        self.count += 1;
        let k = self.count as f64;
        let dz = z - self.mean_z;
        self.mean_z += dz / k;
        let dy = y - self.mean_y;
        self.mean_y += dy / k;
        self.szz += dz * (z - self.mean_z);
        self.szy += dz * (y - self.mean_y);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Determinant of the normal-equations matrix `[[k, Σz], [Σz, Σz²]]`.
    pub fn determinant(&self) -> f64 {
        self.count as f64 * self.szz
    }

    /// `Σ z²` over the pairs seen so far.
    pub fn sum_sq(&self) -> f64 {
        self.szz + self.count as f64 * self.mean_z * self.mean_z
    }

    /// `(intercept, slope)`, or `None` when the fit is singular relative to
    /// `scale` (the number of observations in the estimation window).
    pub fn coefficients(&self, scale: usize) -> Option<(f64, f64)> {
        if self.count < 2 {
            return None;
        }
        let threshold = SINGULARITY_TOLERANCE * scale as f64 * (self.sum_sq() + 1.0);
        if !(self.determinant() > threshold) {
            return None;
        }
        let slope = self.szy / self.szz;
        Some((self.mean_y - slope * self.mean_z, slope))
    }

    fn predict(&self, z: f64, scale: usize) -> Option<f64> {
        self.coefficients(scale)
            .map(|(_, slope)| self.mean_y + slope * (z - self.mean_z))
    }
}

fn check_k0(n: usize, k0: usize) -> Result<()> {
    if k0 < 2 || k0 >= n {
        return Err(config_err(format!(
            "k0 = {k0} must satisfy 2 <= k0 <= n - 1 (n = {n})"
        )));
    }
    Ok(())
}

/// Benchmark (recursive mean) forecast errors `y[t] - mean(y[0..t])`,
/// `t = k0..n-1`.
pub fn benchmark_forecast_errors(y: &[f64], k0: usize) -> Result<Vec<f64>> {
    check_k0(y.len(), k0)?;
    let mut acc: CompensatedSum = y[..k0].iter().copied().collect();
    let mut out = Vec::with_capacity(y.len() - k0);
    for t in k0..y.len() {
        out.push(y[t] - acc.value() / t as f64);
        acc.add(y[t]);
    }
    Ok(out)
}

/// Forecast errors of one single-predictor model.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalErrors {
    pub errors: Vec<f64>,
    /// `true` where the regression was singular and the benchmark forecast was
    /// used instead.
    pub degenerate: Vec<bool>,
}

/// Errors of the model `y[s] = a + b x[s-1]`, refit on all pairs available
/// before each forecast. The first pair is `(x[0], y[1])`.
pub fn marginal_forecast_errors(y: &[f64], x: &[f64], k0: usize) -> Result<MarginalErrors> {
    if x.len() != y.len() {
        return Err(config_err(format!(
            "predictor length {} does not match predictand length {}",
            x.len(),
            y.len()
        )));
    }
    check_k0(y.len(), k0)?;
    Ok(recursive_errors(y, k0, |s| s.checked_sub(1).map(|i| x[i])))
}

/// Same as [`marginal_forecast_errors`] for predictors already shifted so
/// that `x[s]` is the regressor paired with `y[s]`.
pub fn marginal_forecast_errors_lagged(
    y: &[f64],
    x: &[f64],
    k0: usize,
) -> Result<MarginalErrors> {
    if x.len() != y.len() {
        return Err(config_err(format!(
            "predictor length {} does not match predictand length {}",
            x.len(),
            y.len()
        )));
    }
    check_k0(y.len(), k0)?;
    Ok(recursive_errors(y, k0, |s| Some(x[s])))
}

/// `regressor(s)` is the predictor value paired with target `y[s]`, if any.
fn recursive_errors(y: &[f64], k0: usize, regressor: impl Fn(usize) -> Option<f64>) -> MarginalErrors {
    let n = y.len();
    let mut ols = RecursiveOls::new();
    let mut level: CompensatedSum = CompensatedSum::new();
    for (s, &ys) in y.iter().enumerate().take(k0) {
        level.add(ys);
        if let Some(z) = regressor(s) {
            ols.push(z, ys);
        }
    }
    let mut errors = Vec::with_capacity(n - k0);
    let mut degenerate = Vec::with_capacity(n - k0);
    for t in k0..n {
        let forecast = regressor(t).and_then(|z| ols.predict(z, t));
        match forecast {
            Some(f) => {
                errors.push(y[t] - f);
                degenerate.push(false);
            }
            None => {
                errors.push(y[t] - level.value() / t as f64);
                degenerate.push(true);
            }
        }
        level.add(y[t]);
        if let Some(z) = regressor(t) {
            ols.push(z, y[t]);
        }
    }
    MarginalErrors { errors, degenerate }
}

/// Benchmark errors plus one error column per predictor, all aligned on the
/// evaluation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastErrorPanel {
    e0: Vec<f64>,
    columns: Vec<Vec<f64>>,
    degenerate: Vec<Vec<bool>>,
    names: Vec<String>,
}

impl ForecastErrorPanel {
    /// Assembles a panel from precomputed error sequences.
    pub fn new(e0: Vec<f64>, columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.is_empty() || names.len() != columns.len() {
            return Err(config_err("panel needs one name per error column and at least one column"));
        }
        if columns.iter().any(|c| c.len() != e0.len()) || e0.len() < 2 {
            return Err(config_err("error columns must share the benchmark's length (>= 2)"));
        }
        crate::error::ensure_finite(&e0, "benchmark errors")?;
        for (c, name) in columns.iter().zip(&names) {
            crate::error::ensure_finite(c, &format!("errors of {name:?}"))?;
        }
        let degenerate = columns.iter().map(|c| vec![false; c.len()]).collect();
        Ok(Self {
            e0,
            columns,
            degenerate,
            names,
        })
    }

    pub fn e0(&self) -> &[f64] {
        &self.e0
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn degenerate(&self, j: usize) -> &[bool] {
        &self.degenerate[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Evaluation window length `n - k0`.
    pub fn len(&self) -> usize {
        self.e0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e0.is_empty()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }
}

/// Runs the benchmark and every single-predictor model over the sample.
/// Columns are evaluated in parallel; the result does not depend on scheduling.
pub fn forecast_error_panel(sample: &SeriesSample, config: &EvalConfig) -> Result<ForecastErrorPanel> {
    if config.n() != sample.n() {
        return Err(config_err(format!(
            "configuration built for n = {} but sample has n = {}",
            config.n(),
            sample.n()
        )));
    }
    let k0 = config.k0();
    let y = sample.y();
    let e0 = benchmark_forecast_errors(y, k0)?;
    let marginal: Vec<MarginalErrors> = sample
        .columns()
        .par_iter()
        .map(|x| match sample.timing() {
            PredictorTiming::Contemporaneous => marginal_forecast_errors(y, x, k0),
            PredictorTiming::Lagged => marginal_forecast_errors_lagged(y, x, k0),
        })
        .collect::<Result<_>>()?;
    let (columns, degenerate) = marginal.into_iter().map(|m| (m.errors, m.degenerate)).unzip();
    Ok(ForecastErrorPanel {
        e0,
        columns,
        degenerate,
        names: sample.names().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    /// Batch OLS of y[s] on (1, x[s-1]): normal equations for the pairs `(x[s-1], y[s])`, `s < t`, solved in
    /// centred two-pass form.
    fn batch_fit(y: &[f64], x: &[f64], t: usize) -> Option<(f64, f64)> {
        let k = (t - 1) as f64;
        if t < 3 {
            return None;
        }
        let mz = (1..t).map(|s| x[s - 1]).sum::<f64>() / k;
        let my = (1..t).map(|s| y[s]).sum::<f64>() / k;
        let szz: f64 = (1..t).map(|s| (x[s - 1] - mz).powi(2)).sum();
        let szy: f64 = (1..t).map(|s| (x[s - 1] - mz) * (y[s] - my)).sum();
        if szz < 1e-9 {
            return None;
        }
        let b = szy / szz;
        Some((my - b * mz, b))
    }

    #[test]
    fn benchmark_small_example() {
        assert_eq!(benchmark_forecast_errors(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), vec![1.5, 2.0]);
    }

    #[test]
    fn benchmark_constant_series_is_zero() {
        let e = benchmark_forecast_errors(&[3.25; 20], 5).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn benchmark_matches_refit_oracle() {
        let y = noise(200, 1);
        let e = benchmark_forecast_errors(&y, 100).unwrap();
        for (i, t) in (100..200).enumerate() {
            let m: f64 = y[..t].iter().sum::<f64>() / t as f64;
            assert!((e[i] - (y[t] - m)).abs() < 1e-12);
        }
    }

    #[test]
    fn benchmark_rejects_bad_k0() {
        assert!(benchmark_forecast_errors(&[1.0; 10], 1).is_err());
        assert!(benchmark_forecast_errors(&[1.0; 10], 10).is_err());
    }

    #[test]
    fn zero_regressor_falls_back_to_benchmark() {
        let y = noise(50, 2);
        let x = vec![0.0; 50];
        let m = marginal_forecast_errors(&y, &x, 10).unwrap();
        assert_eq!(m.errors, benchmark_forecast_errors(&y, 10).unwrap());
        assert!(m.degenerate.iter().all(|&d| d));
    }

    #[test]
    fn constant_nonzero_regressor_is_flagged() {
        let y = noise(40, 3);
        let m = marginal_forecast_errors(&y, &vec![7.5; 40], 10).unwrap();
        assert!(m.degenerate.iter().all(|&d| d));
        assert!(m.errors.iter().all(|e| e.is_finite()));
    }

    #[test]
    fn exact_linear_law_is_forecast_exactly() {
        let x = noise(30, 4);
        let mut y = vec![0.3; 30];
        for s in 1..30 {
            y[s] = 2.0 * x[s - 1];
        }
        let m = marginal_forecast_errors(&y, &x, 2).unwrap();
        // t = 2 has a single pair and falls back; from t = 3 on the fit is exact.
        assert!(m.degenerate[0]);
        for e in &m.errors[1..] {
            assert!(e.abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn marginal_matches_batch_normal_equations() {
        let y = noise(120, 5);
        let x = noise(120, 6);
        let k0 = 30;
        let m = marginal_forecast_errors(&y, &x, k0).unwrap();
        for (i, t) in (k0..120).enumerate() {
            let (a, b) = batch_fit(&y, &x, t).unwrap();
            let expected = y[t] - (a + b * x[t - 1]);
            assert!((m.errors[i] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn lagged_variant_matches_batch_fit() {
        let y = noise(60, 7);
        let x = noise(60, 8);
        let k0 = 20;
        let lagged = marginal_forecast_errors_lagged(&y, &x, k0).unwrap();
        // Pairs (x[s], y[s]) for s < t: the contemporaneous oracle with y shifted forward.
        let mut padded_y = vec![0.0];
        padded_y.extend_from_slice(&y);
        for (i, t) in (k0..60).enumerate() {
            let (a, b) = batch_fit(&padded_y, &x, t + 1).unwrap();
            let expected = y[t] - (a + b * x[t]);
            assert!((lagged.errors[i] - expected).abs() < 1e-8);
        }
        assert!(lagged.degenerate.iter().all(|&d| !d));
    }

    #[test]
    fn length_mismatch_is_config_error() {
        assert!(marginal_forecast_errors(&[0.0; 10], &[0.0; 9], 3).is_err());
    }

    #[test]
    fn panel_columns_match_single_calls() {
        let y = noise(80, 9);
        let cols = vec![noise(80, 10), noise(80, 11), noise(80, 12)];
        let sample = SeriesSample::unnamed(y.clone(), cols.clone()).unwrap();
        let cfg = EvalConfig::with_defaults(80, 0.25, 0.3).unwrap();
        let panel = forecast_error_panel(&sample, &cfg).unwrap();
        assert_eq!(panel.e0(), benchmark_forecast_errors(&y, 20).unwrap().as_slice());
        for (j, x) in cols.iter().enumerate() {
            assert_eq!(panel.column(j), marginal_forecast_errors(&y, x, 20).unwrap().errors.as_slice());
        }

        let permuted = SeriesSample::new(
            y,
            vec![cols[2].clone(), cols[0].clone(), cols[1].clone()],
            vec!["x3".into(), "x1".into(), "x2".into()],
            PredictorTiming::Contemporaneous,
        )
        .unwrap();
        let pp = forecast_error_panel(&permuted, &cfg).unwrap();
        assert_eq!(pp.column(0), panel.column(2));
        assert_eq!(pp.column(1), panel.column(0));
        assert_eq!(pp.column(2), panel.column(1));
    }

    #[test]
    fn panel_rejects_mismatched_config() {
        let sample = SeriesSample::unnamed(noise(40, 1), vec![noise(40, 2)]).unwrap();
        let cfg = EvalConfig::with_defaults(41, 0.25, 0.3).unwrap();
        assert!(forecast_error_panel(&sample, &cfg).is_err());
    }

    #[test]
    fn panel_is_identical_serial_and_parallel() {
        let n = 500;
        let y = noise(n, 20);
        let cols: Vec<Vec<f64>> = (0..100).map(|j| noise(n, 100 + j)).collect();
        let sample = SeriesSample::unnamed(y.clone(), cols.clone()).unwrap();
        let cfg = EvalConfig::with_defaults(n, 0.25, 0.3).unwrap();
        let parallel = forecast_error_panel(&sample, &cfg).unwrap();
        let serial: Vec<Vec<f64>> = cols
            .iter()
            .map(|x| marginal_forecast_errors(&y, x, cfg.k0()).unwrap().errors)
            .collect();
        assert_eq!(parallel.columns(), serial.as_slice());
        let again = forecast_error_panel(&sample, &cfg).unwrap();
        assert_eq!(parallel, again);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn affine_invariance(seed in 0u64..1000, a in prop_oneof![-50.0..-0.05f64, 0.05..50.0f64], b in -100.0..100.0f64) {
                let y = noise(60, seed);
                let x = noise(60, seed + 7919);
                let tx: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let e1 = marginal_forecast_errors(&y, &x, 15).unwrap();
                let e2 = marginal_forecast_errors(&y, &tx, 15).unwrap();
                for (u, v) in e1.errors.iter().zip(&e2.errors) {
                    prop_assert!((u - v).abs() < 1e-8);
                }
            }

            #[test]
            fn recursive_matches_batch(seed in 0u64..1000, level in -1e3..1e3f64) {
                let y = noise(50, seed);
                let x: Vec<f64> = noise(50, seed + 1).iter().map(|v| v + level).collect();
                let mut ols = RecursiveOls::new();
                for t in 2..50 {
                    ols.push(x[t - 2], y[t - 1]);
                    if let (Some((a, b)), Some((ba, bb))) = (ols.coefficients(t), batch_fit(&y, &x, t)) {
                        prop_assert!((b - bb).abs() <= 1e-8 * bb.abs().max(1.0));
                        prop_assert!((a - ba).abs() <= 1e-8 * ba.abs().max(1.0));
                    }
                }
            }
        }
    }
}
