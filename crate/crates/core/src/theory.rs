//! Closed-form local-power noncentralities and the key-player selection rule.
//!
//! Under local alternatives the aggregate statistic converges to `Z + Q` with
//! `Z` standard normal. `Q` is `g(mu0, pi0, phi)` times a pool average of
//! squared projections of the active signal onto each candidate predictor.
//! Stationary and mildly integrated predictors contribute through different
//! moments; in a mixed pool each block only sees its own actives.

use serde::Serialize;

use crate::config::validate_mu0;
use crate::error::{param_err, Result};

/// Plug-in `phi^2` for Gaussian errors with unit variance (variance of a
/// centred chi-square with one degree of freedom).
pub const GAUSSIAN_PHI_SQ: f64 = 2.0;

/// `2 sqrt(1 - pi0) sqrt(mu0 (1 - mu0)) / (sqrt(phi^2) (1 - 2 mu0))`.
pub fn g_factor(mu0: f64, pi0: f64, phi_sq: f64) -> Result<f64> {
    validate_mu0(mu0)?;
    if !(pi0 > 0.0 && pi0 < 1.0) {
        return Err(param_err(format!("pi0 = {pi0} must lie in (0, 1)")));
    }
    if !(phi_sq > 0.0 && phi_sq.is_finite()) {
        return Err(param_err(format!("phi^2 = {phi_sq} must be positive")));
    }
    Ok(2.0 * (1.0 - pi0).sqrt() * (mu0 * (1.0 - mu0)).sqrt() / (phi_sq.sqrt() * (1.0 - 2.0 * mu0)))
}

/// Second moments `E[x_i x_j]` of the stationary predictors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryBlock {
    pub moments: Vec<Vec<f64>>,
}

/// Mildly integrated predictors: localizing constants `c_j` and the innovation
/// covariance `sigma_{v_i v_j}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistentBlock {
    pub c: Vec<f64>,
    pub sigma_v: Vec<Vec<f64>>,
}

/// Inputs to the noncentrality formulas. Active indices are 0-based within
/// their own block; a mixed pool lists the stationary block first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalPowerInputs {
    pub mu0: f64,
    pub pi0: f64,
    pub phi_sq: f64,
    pub stationary: Option<StationaryBlock>,
    pub persistent: Option<PersistentBlock>,
    pub active_stationary: Vec<(usize, f64)>,
    pub active_persistent: Vec<(usize, f64)>,
}

impl LocalPowerInputs {
    pub fn stationary(mu0: f64, pi0: f64, moments: Vec<Vec<f64>>, active: Vec<(usize, f64)>) -> Self {
        LocalPowerInputs {
            mu0,
            pi0,
            phi_sq: GAUSSIAN_PHI_SQ,
            stationary: Some(StationaryBlock { moments }),
            persistent: None,
            active_stationary: active,
            active_persistent: Vec::new(),
        }
    }

    pub fn persistent(
        mu0: f64,
        pi0: f64,
        c: Vec<f64>,
        sigma_v: Vec<Vec<f64>>,
        active: Vec<(usize, f64)>,
    ) -> Self {
        LocalPowerInputs {
            mu0,
            pi0,
            phi_sq: GAUSSIAN_PHI_SQ,
            stationary: None,
            persistent: Some(PersistentBlock { c, sigma_v }),
            active_stationary: Vec::new(),
            active_persistent: active,
        }
    }

    fn p1(&self) -> usize {
        self.stationary.as_ref().map_or(0, |b| b.moments.len())
    }

    fn p2(&self) -> usize {
        self.persistent.as_ref().map_or(0, |b| b.c.len())
    }

    fn g(&self) -> Result<f64> {
        g_factor(self.mu0, self.pi0, self.phi_sq)
    }
}

fn check_square_symmetric(m: &[Vec<f64>], what: &str) -> Result<()> {
    let p = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != p {
            return Err(param_err(format!("{what} must be square ({p} rows, row {i} has {})", row.len())));
        }
        if !(row[i] > 0.0 && row[i].is_finite()) {
            return Err(param_err(format!("{what} has a non-positive diagonal entry at {i}")));
        }
        for j in 0..i {
            let (a, b) = (m[i][j], m[j][i]);
            if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(param_err(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn check_active(active: &[(usize, f64)], p: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; p];
    for &(i, beta) in active {
        if i >= p {
            return Err(param_err(format!("{what} active index {i} outside a block of size {p}")));
        }
        if seen[i] {
            return Err(param_err(format!("{what} active index {i} listed twice")));
        }
        if !beta.is_finite() {
            return Err(param_err(format!("{what} slope for index {i} is not finite")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `sum_j (sum_i beta_i E[x_i x_j] / sqrt(E[x_j^2]))^2` over the stationary block.
fn stationary_sum(inputs: &LocalPowerInputs) -> Result<f64> {
    let Some(block) = &inputs.stationary else {
        if inputs.active_stationary.is_empty() {
            return Ok(0.0);
        }
        return Err(param_err("stationary actives given without stationary moments"));
    };
    check_square_symmetric(&block.moments, "stationary moment matrix")?;
    check_active(&inputs.active_stationary, block.moments.len(), "stationary")?;
    let m = &block.moments;
    Ok((0..m.len())
        .map(|j| {
            let proj: f64 = inputs.active_stationary.iter().map(|&(i, b)| b * m[i][j]).sum();
            proj * proj / m[j][j]
        })
        .sum())
}

/// `sum_j (sum_i beta_i sigma_ij / sqrt(sigma_jj) sqrt(2 c_j / (c_i + c_j)^2))^2`
/// over the persistent block.
fn persistent_sum(inputs: &LocalPowerInputs) -> Result<f64> {
    let Some(block) = &inputs.persistent else {
        if inputs.active_persistent.is_empty() {
            return Ok(0.0);
        }
        return Err(param_err("persistent actives given without persistence parameters"));
    };
    let p = block.c.len();
    if block.sigma_v.len() != p {
        return Err(param_err(format!(
            "persistent block has {p} localizing constants but a {}-row covariance",
            block.sigma_v.len()
        )));
    }
    if let Some(j) = block.c.iter().position(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(param_err(format!("localizing constant c_{j} = {} must be positive", block.c[j])));
    }
    check_square_symmetric(&block.sigma_v, "innovation covariance")?;
    check_active(&inputs.active_persistent, p, "persistent")?;
    let (c, s) = (&block.c, &block.sigma_v);
    Ok((0..p)
        .map(|j| {
            let proj: f64 = inputs
                .active_persistent
                .iter()
                .map(|&(i, b)| b * s[i][j] / s[j][j].sqrt() * (2.0 * c[j]).sqrt() / (c[i] + c[j]))
                .sum();
            proj * proj
        })
        .sum())
}

/// Noncentrality for a pool of stationary predictors.
pub fn noncentrality_stationary(inputs: &LocalPowerInputs) -> Result<f64> {
    let p = inputs.p1();
    if p == 0 {
        return Err(param_err("stationary moments are required"));
    }
    Ok(inputs.g()? * stationary_sum(inputs)? / p as f64)
}

/// Noncentrality for a pool of mildly integrated predictors.
pub fn noncentrality_persistent(inputs: &LocalPowerInputs) -> Result<f64> {
    let p = inputs.p2();
    if p == 0 {
        return Err(param_err("persistence parameters are required"));
    }
    Ok(inputs.g()? * persistent_sum(inputs)? / p as f64)
}

/// Noncentrality for a pool mixing both kinds; cross-block terms vanish in
/// the limit and are omitted.
pub fn noncentrality_mixed(inputs: &LocalPowerInputs) -> Result<f64> {
    let p = inputs.p1() + inputs.p2();
    if p == 0 {
        return Err(param_err("at least one predictor block is required"));
    }
    Ok(inputs.g()? * (stationary_sum(inputs)? + persistent_sum(inputs)?) / p as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KeyPlayerChoice {
    PickPersistent,
    PickStationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyPlayerPrediction {
    pub choice: KeyPlayerChoice,
    /// The two sides of the inequality were equal.
    pub boundary: bool,
    /// `beta_b^2`.
    pub persistent_side: f64,
    /// `E[x_a^2] / (sigma_vb^2 / (2 c_b)) * beta_a^2`.
    pub stationary_side: f64,
}

/// Which of one stationary (`a`) and one mildly integrated (`b`) active
/// predictor the enhanced argmax settles on asymptotically.
pub fn keyplayer_prediction(
    beta_a_star: f64,
    e_xa_sq: f64,
    beta_b_star: f64,
    sigma_vb_sq: f64,
    c_b: f64,
) -> Result<KeyPlayerPrediction> {
    for (v, what) in [(e_xa_sq, "E[x_a^2]"), (sigma_vb_sq, "sigma_vb^2"), (c_b, "c_b")] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(param_err(format!("{what} = {v} must be positive")));
        }
    }
    let persistent_side = beta_b_star * beta_b_star;
    let stationary_side = e_xa_sq / (sigma_vb_sq / (2.0 * c_b)) * beta_a_star * beta_a_star;
    let choice = if persistent_side > stationary_side {
        KeyPlayerChoice::PickPersistent
    } else {
        KeyPlayerChoice::PickStationary
    };
    Ok(KeyPlayerPrediction {
        choice,
        boundary: persistent_side == stationary_side,
        persistent_side,
        stationary_side,
    })
}

/// Pitman efficiency of the raw statistic relative to the enhanced one.
pub fn are_ratio() -> f64 {
    0.5
}

/// Stationary covariance of `x_t = diag(phi) x_{t-1} + v_t` with
/// `Var(v_t) = sigma`: `Gamma_ij = sigma_ij / (1 - phi_i phi_j)`.
pub fn var1_stationary_covariance(phi: &[f64], sigma: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if sigma.len() != phi.len() || sigma.iter().any(|r| r.len() != phi.len()) {
        return Err(param_err("autoregressive coefficients and covariance disagree in size"));
    }
    if let Some(i) = phi.iter().position(|f| !(f.abs() < 1.0)) {
        return Err(param_err(format!("coefficient {} at {i} is not stationary", phi[i])));
    }
    Ok(phi
        .iter()
        .zip(sigma)
        .map(|(fi, row)| row.iter().zip(phi).map(|(s, fj)| s / (1.0 - fi * fj)).collect())
        .collect())
}

/// Localizing constant `c` that gives autoregressive coefficient `rho` at
/// sample size `n` under `rho = 1 - c / n^alpha`.
pub fn localizing_constant(rho: f64, n: usize, alpha: f64) -> f64 {
    (1.0 - rho) * (n as f64).powf(alpha)
}
