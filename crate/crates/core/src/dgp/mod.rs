//! Simulation designs: Gaussian VAR(1) predictor pools, local-to-null
//! predictive regressions and the Monte Carlo harness built on them.
//!
//! A [`DgpSpec`] is plain data; [`DgpSpec::prepare`] validates it once and
//! factorizes the joint innovation covariance so that replications only draw
//! and multiply.

mod experiment;
mod generate;
pub mod scenarios;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::MIN_SAMPLE_SIZE;
use crate::error::{param_err, Result};

pub use experiment::{
    run_keyplayer_experiment, run_power_experiment, run_size_experiment, simulate_replications,
    summarize, McEntry, McSettings, McSummary, RepOutcome, OTHER_BUCKET,
};
pub use generate::{
    ar1_coefficient, build_response, gen_gaussian_system, gen_mildly_integrated, gen_var1,
    replication_rng, simulate_sample, GaussianSystem, PredictorPath,
};

/// Default number of discarded start-up steps.
pub const DEFAULT_BURN_IN: usize = 200;

/// Autoregressive coefficient on a stationary predictor.
pub const STATIONARY_AR: f64 = 0.5;
/// Autoregressive coefficient on a persistent predictor.
pub const PERSISTENT_AR: f64 = 0.95;
/// Correlation decay in the KMS innovation covariance.
pub const KMS_RHO: f64 = 0.5;

/// Diagonal VAR(1) coefficient patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhiScheme {
    /// Every predictor at 0.50.
    A,
    /// Every predictor at 0.95.
    B,
    /// The first `p1` predictors at 0.50, the rest at 0.95.
    C { p1: usize },
}

impl PhiScheme {
    pub fn coefficients(self, p: usize) -> Vec<f64> {
        match self {
            PhiScheme::A => vec![STATIONARY_AR; p],
            PhiScheme::B => vec![PERSISTENT_AR; p],
            PhiScheme::C { p1 } => (0..p)
                .map(|j| if j < p1 { STATIONARY_AR } else { PERSISTENT_AR })
                .collect(),
        }
    }
}

/// Covariance of `(u_t, v_t')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaScheme {
    /// Identity.
    Omega0,
    /// KMS `Sigma_vv = 0.5^|i-j|`, `u` independent of `v`.
    Omega1,
    /// KMS `Sigma_vv` and `Cov(u, v_j) = (-0.5)^j` for 1-based `j`.
    Omega2,
}

impl OmegaScheme {
    /// Full `(p + 1) x (p + 1)` covariance with `u` first.
    pub fn matrix(self, p: usize, sigma_u_sq: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(p + 1, p + 1);
        m[(0, 0)] = sigma_u_sq;
        for i in 0..p {
            for j in 0..p {
                m[(i + 1, j + 1)] = match self {
                    OmegaScheme::Omega0 => f64::from(u8::from(i == j)),
                    _ => KMS_RHO.powi((i as i32 - j as i32).abs()),
                };
            }
            if self == OmegaScheme::Omega2 {
                let cov = (-0.5f64).powi(i as i32 + 1);
                m[(0, i + 1)] = cov;
                m[(i + 1, 0)] = cov;
            }
        }
        m
    }
}

/// Rate at which an active slope shrinks with the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlopeRate {
    /// `beta = beta_star`.
    Fixed,
    /// `beta = beta_star / n^(1/4)`.
    Stationary,
    /// `beta = beta_star / n^((1 + 2 alpha) / 4)`.
    MildlyIntegrated { alpha: f64 },
}

impl SlopeRate {
    pub fn exponent(self) -> f64 {
        match self {
            SlopeRate::Fixed => 0.0,
            SlopeRate::Stationary => 0.25,
            SlopeRate::MildlyIntegrated { alpha } => (1.0 + 2.0 * alpha) / 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivePredictor {
    /// 0-based column index.
    pub index: usize,
    pub beta_star: f64,
    pub rate: SlopeRate,
}

impl ActivePredictor {
    pub fn effective_slope(&self, n: usize) -> f64 {
        self.beta_star / (n as f64).powf(self.rate.exponent())
    }
}

/// Columns whose autoregressive coefficient is `1 - c_j / n^alpha` instead of
/// the scheme's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MildIntegration {
    pub columns: Vec<usize>,
    pub c: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub p: usize,
    pub phi_scheme: PhiScheme,
    pub omega_scheme: OmegaScheme,
    pub sigma_u_sq: f64,
    pub active: Vec<ActivePredictor>,
    pub theta0: f64,
    pub burn_in: usize,
    pub mildly_integrated: Option<MildIntegration>,
}

impl DgpSpec {
    /// A null design with unit error variance, zero intercept and the default burn-in.
    pub fn null(n: usize, p: usize, phi_scheme: PhiScheme, omega_scheme: OmegaScheme) -> Self {
        DgpSpec {
            n,
            p,
            phi_scheme,
            omega_scheme,
            sigma_u_sq: 1.0,
            active: Vec::new(),
            theta0: 0.0,
            burn_in: DEFAULT_BURN_IN,
            mildly_integrated: None,
        }
    }

    pub fn with_active(mut self, active: Vec<ActivePredictor>) -> Self {
        self.active = active;
        self
    }

    pub fn with_n(&self, n: usize) -> Self {
        DgpSpec { n, ..self.clone() }
    }

    /// Validates the design and factorizes its innovation covariance.
    pub fn prepare(&self) -> Result<PreparedDgp> {
        if self.n < MIN_SAMPLE_SIZE {
            return Err(param_err(format!("n = {} is below the minimum of {MIN_SAMPLE_SIZE}", self.n)));
        }
        if self.p == 0 {
            return Err(param_err("the predictor pool must be non-empty"));
        }
        if let PhiScheme::C { p1 } = self.phi_scheme {
            if p1 > self.p {
                return Err(param_err(format!("p1 = {p1} exceeds p = {}", self.p)));
            }
        }
        if !(self.sigma_u_sq > 0.0 && self.sigma_u_sq.is_finite()) {
            return Err(param_err(format!("sigma_u^2 = {} must be positive", self.sigma_u_sq)));
        }
        if !self.theta0.is_finite() {
            return Err(param_err("intercept must be finite"));
        }
        let mut seen = vec![false; self.p];
        for a in &self.active {
            if a.index >= self.p {
                return Err(param_err(format!("active index {} outside a pool of {}", a.index, self.p)));
            }
            if std::mem::replace(&mut seen[a.index], true) {
                return Err(param_err(format!("active index {} listed twice", a.index)));
            }
            if !a.beta_star.is_finite() {
                return Err(param_err(format!("slope on predictor {} is not finite", a.index)));
            }
            if let SlopeRate::MildlyIntegrated { alpha } = a.rate {
                check_alpha(alpha)?;
            }
        }

        let mut phi = self.phi_scheme.coefficients(self.p);
        if let Some(mi) = &self.mildly_integrated {
            check_alpha(mi.alpha)?;
            if mi.columns.len() != mi.c.len() {
                return Err(param_err("mildly integrated columns and constants differ in length"));
            }
            let mut seen = vec![false; self.p];
            for (&j, &c) in mi.columns.iter().zip(&mi.c) {
                if j >= self.p || std::mem::replace(&mut seen[j], true) {
                    return Err(param_err(format!("invalid mildly integrated column {j}")));
                }
                phi[j] = ar1_coefficient(self.n, c, mi.alpha)?;
            }
        }

        let omega = self.omega_scheme.matrix(self.p, self.sigma_u_sq);
        let factor = if self.omega_scheme == OmegaScheme::Omega0 {
            InnovationFactor::Diagonal(self.sigma_u_sq.sqrt())
        } else {
            let chol = omega
                .clone()
                .cholesky()
                .ok_or_else(|| param_err("innovation covariance is not positive definite"))?;
            let l = chol.l();
            let dim = self.p + 1;
            let mut rows = Vec::with_capacity(dim * (dim + 1) / 2);
            for i in 0..dim {
                for j in 0..=i {
                    rows.push(l[(i, j)]);
                }
            }
            InnovationFactor::Lower(rows)
        };
        let slopes = self
            .active
            .iter()
            .map(|a| (a.index, a.effective_slope(self.n)))
            .collect();
        Ok(PreparedDgp {
            spec: self.clone(),
            phi,
            factor,
            slopes,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(param_err(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

/// Square-root factor of the innovation covariance.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum InnovationFactor {
    /// Identity for `v`, scale for `u`.
    Diagonal(f64),
    /// Packed lower-triangular Cholesky factor, row by row.
    Lower(Vec<f64>),
}

/// A validated design ready for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDgp {
    spec: DgpSpec,
    phi: Vec<f64>,
    pub(crate) factor: InnovationFactor,
    slopes: Vec<(usize, f64)>,
}

impl PreparedDgp {
    pub fn spec(&self) -> &DgpSpec {
        &self.spec
    }

    /// Autoregressive coefficient of each predictor.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `(column, beta_star / n^gamma)` for each active predictor.
    pub fn slopes(&self) -> &[(usize, f64)] {
        &self.slopes
    }

    /// Draws per replication, burn-in included.
    pub fn total_len(&self) -> usize {
        self.spec.n + self.spec.burn_in
    }
}
