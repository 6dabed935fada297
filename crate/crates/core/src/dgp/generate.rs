use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{InnovationFactor, PreparedDgp};
use crate::config::SeriesSample;
use crate::error::{param_err, Result};

/// Generator for replication `rep` of an experiment keyed by `master_seed`.
/// Each replication gets its own ChaCha stream, so draws do not depend on
/// how replications are scheduled.
pub fn replication_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}

/// Joint innovations over the whole horizon, burn-in included.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSystem {
    pub u: Vec<f64>,
    /// `v[j][t]`.
    pub v: Vec<Vec<f64>>,
}

/// Draws `(u_t, v_t')` with covariance `Omega` for `t` over the full horizon.
pub fn gen_gaussian_system<R: Rng + ?Sized>(dgp: &PreparedDgp, rng: &mut R) -> GaussianSystem {
    let p = dgp.spec().p;
    let total = dgp.total_len();
    let mut u = vec![0.0; total];
    let mut v = vec![vec![0.0; total]; p];
    let mut z = vec![0.0; p + 1];
    for t in 0..total {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        match &dgp.factor {
            InnovationFactor::Diagonal(su) => {
                u[t] = su * z[0];
                for j in 0..p {
                    v[j][t] = z[j + 1];
                }
            }
            InnovationFactor::Lower(l) => {
                let mut offset = 0;
                for i in 0..=p {
                    let row = &l[offset..offset + i + 1];
                    let w: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                    if i == 0 {
                        u[t] = w;
                    } else {
                        v[i - 1][t] = w;
                    }
                    offset += i + 1;
                }
            }
        }
    }
    GaussianSystem { u, v }
}

/// Predictor paths after the burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorPath {
    /// `x[j][t]` for the `n` retained periods.
    pub x: Vec<Vec<f64>>,
    /// Each predictor in the period just before the first retained one
    /// (zero without burn-in).
    pub pre_sample: Vec<f64>,
}

fn ar1_path(coef: f64, innovations: &[f64], burn_in: usize) -> (Vec<f64>, f64) {
    let mut prev = 0.0;
    let mut pre_sample = 0.0;
    let mut kept = Vec::with_capacity(innovations.len().saturating_sub(burn_in));
    for (t, e) in innovations.iter().enumerate() {
        let x = coef * prev + e;
        if t + 1 == burn_in {
            pre_sample = x;
        }
        if t >= burn_in {
            kept.push(x);
        }
        prev = x;
    }
    (kept, pre_sample)
}

/// `x_t = Phi x_{t-1} + v_t` from `x = 0`, dropping the burn-in.
pub fn gen_var1(dgp: &PreparedDgp, system: &GaussianSystem) -> PredictorPath {
    let burn_in = dgp.spec().burn_in;
    let (x, pre_sample) = dgp
        .phi()
        .iter()
        .zip(&system.v)
        .map(|(&coef, v)| ar1_path(coef, v, burn_in))
        .unzip();
    PredictorPath { x, pre_sample }
}

/// `1 - c / n^alpha`.
pub fn ar1_coefficient(n: usize, c: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(param_err(format!("localizing constant c = {c} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param_err(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let rho = 1.0 - c / (n as f64).powf(alpha);
    if !(rho > -1.0 && rho <= 1.0) {
        return Err(param_err(format!(
            "coefficient 1 - {c}/{n}^{alpha} = {rho} lies outside (-1, 1]"
        )));
    }
    Ok(rho)
}

/// Mildly integrated columns `x_jt = (1 - c_j / n^alpha) x_{j,t-1} + v_jt`
/// from `x = 0`; the first `burn_in` periods of `v` are discarded.
pub fn gen_mildly_integrated(
    n: usize,
    c: &[f64],
    alpha: f64,
    v: &[Vec<f64>],
    burn_in: usize,
) -> Result<PredictorPath> {
    if c.len() != v.len() {
        return Err(param_err("one localizing constant per innovation column is required"));
    }
    let mut x = Vec::with_capacity(v.len());
    let mut pre_sample = Vec::with_capacity(v.len());
    for (&cj, col) in c.iter().zip(v) {
        if col.len() != n + burn_in {
            return Err(param_err(format!(
                "innovation column has {} draws, expected {}",
                col.len(),
                n + burn_in
            )));
        }
        let (kept, pre) = ar1_path(ar1_coefficient(n, cj, alpha)?, col, burn_in);
        x.push(kept);
        pre_sample.push(pre);
    }
    Ok(PredictorPath { x, pre_sample })
}

/// `y_t = theta0 + sum_i beta_i x_{i,t-1} + u_t` over the retained periods,
/// so row `t` of the predictors is dated with `y_t`.
pub fn build_response(path: &PredictorPath, u: &[f64], dgp: &PreparedDgp) -> Vec<f64> {
    let spec = dgp.spec();
    let retained_u = &u[spec.burn_in..];
    (0..spec.n)
        .map(|t| {
            let signal: f64 = dgp
                .slopes()
                .iter()
                .map(|&(j, b)| {
                    let prev = if t == 0 { path.pre_sample[j] } else { path.x[j][t - 1] };
                    b * prev
                })
                .sum();
            spec.theta0 + signal + retained_u[t]
        })
        .collect()
}

/// One replication as a sample for the forecast engine.
pub fn simulate_sample(dgp: &PreparedDgp, master_seed: u64, rep: u64) -> Result<SeriesSample> {
    let mut rng = replication_rng(master_seed, rep);
    let system = gen_gaussian_system(dgp, &mut rng);
    let path = gen_var1(dgp, &system);
    let y = build_response(&path, &system.u, dgp);
    SeriesSample::unnamed(y, path.x)
}
