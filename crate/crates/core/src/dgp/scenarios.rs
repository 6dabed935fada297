//! The simulation designs of the size, power and key-player experiments.
//!
//! Predictor labels: `a` and `b` are the first two (stationary) columns,
//! `c` and `d` the first two columns of the persistent half of the pool.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ActivePredictor, DgpSpec, OmegaScheme, PhiScheme, SlopeRate, PERSISTENT_AR, STATIONARY_AR};
use crate::error::{param_err, Error, Result};
use crate::theory::{localizing_constant, var1_stationary_covariance, LocalPowerInputs, GAUSSIAN_PHI_SQ};

/// Mild-integration exponent matched to the 0.95 autoregressive coefficient.
pub const PERSISTENCE_ALPHA: f64 = 0.85;
/// Sample size of the power experiments.
pub const POWER_N: usize = 500;
/// Pool size of the power and key-player experiments.
pub const POWER_P: usize = 100;

const STATIONARY: SlopeRate = SlopeRate::Stationary;
const PERSISTENT: SlopeRate = SlopeRate::MildlyIntegrated { alpha: PERSISTENCE_ALPHA };

/// A persistence scheme paired with an innovation covariance, e.g. `A-i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeScenario {
    pub phi: char,
    pub omega: OmegaScheme,
}

impl SizeScenario {
    /// Null design with `p1 = p / 2` under scheme C.
    pub fn design(self, n: usize, p: usize) -> DgpSpec {
        let phi = match self.phi {
            'A' => PhiScheme::A,
            'B' => PhiScheme::B,
            _ => PhiScheme::C { p1: p / 2 },
        };
        DgpSpec::null(n, p, phi, self.omega)
    }
}

impl fmt::Display for SizeScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let omega = match self.omega {
            OmegaScheme::Omega0 => "i",
            OmegaScheme::Omega1 => "ii",
            OmegaScheme::Omega2 => "iii",
        };
        write!(f, "{}-{omega}", self.phi)
    }
}

impl FromStr for SizeScenario {
    type Err = Error;

    /// Accepts `A-i`, `A(i)`, `b-ii`, ...
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !matches!(c, '-' | '(' | ')' | ' ')).collect();
        let mut chars = cleaned.chars();
        let phi = chars.next().map(|c| c.to_ascii_uppercase());
        let omega = match chars.as_str().to_ascii_lowercase().as_str() {
            "i" => Some(OmegaScheme::Omega0),
            "ii" => Some(OmegaScheme::Omega1),
            "iii" => Some(OmegaScheme::Omega2),
            _ => None,
        };
        match (phi, omega) {
            (Some(phi @ ('A' | 'B' | 'C')), Some(omega)) => Ok(SizeScenario { phi, omega }),
            _ => Err(param_err(format!("unknown scenario '{s}' (expected e.g. A-i, B-ii, C-iii)"))),
        }
    }
}

/// Power designs on the mixed pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerDgp {
    /// Stationary `a`, `b`.
    I,
    /// Persistent `c`, `d`, weak signal.
    IIa,
    /// Persistent `c`, `d`, stronger signal.
    IIb,
    /// All four.
    III,
}

impl PowerDgp {
    pub const ALL: [PowerDgp; 4] = [PowerDgp::I, PowerDgp::IIa, PowerDgp::IIb, PowerDgp::III];

    /// `(beta_a, beta_b, beta_c, beta_d)` local-to-null slopes for each of the
    /// four columns, weakest first.
    pub fn slope_grid(self) -> [[f64; 4]; 4] {
        let grid = |a: [f64; 4], b: [f64; 4], c: [f64; 4], d: [f64; 4]| {
            [0, 1, 2, 3].map(|k| [a[k], b[k], c[k], d[k]])
        };
        let zero = [0.0; 4];
        let (s1, s2, s3) = ([2.0, 3.0, 4.0, 5.0], [5.0, 6.0, 7.0, 8.0], [8.0, 9.0, 10.0, 11.0]);
        match self {
            PowerDgp::I => grid(s1, s2, zero, zero),
            PowerDgp::IIa => grid(zero, zero, s1, s2),
            PowerDgp::IIb => grid(zero, zero, s2, s3),
            PowerDgp::III => grid(s1, s2, s1, s2),
        }
    }

    /// Design for grid column `column` (0..4).
    pub fn design(self, column: usize, n: usize, p: usize) -> Result<DgpSpec> {
        let grid = self.slope_grid();
        let slopes = grid
            .get(column)
            .ok_or_else(|| param_err(format!("slope column {column} outside 0..4")))?;
        mixed_design(n, p, *slopes)
    }

    pub fn label(self) -> &'static str {
        match self {
            PowerDgp::I => "i",
            PowerDgp::IIa => "ii-a",
            PowerDgp::IIb => "ii-b",
            PowerDgp::III => "iii",
        }
    }
}

impl FromStr for PowerDgp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PowerDgp::ALL
            .into_iter()
            .find(|d| d.label() == s.to_ascii_lowercase().trim_matches(|c| c == '(' || c == ')'))
            .ok_or_else(|| param_err(format!("unknown power design '{s}' (expected i, ii-a, ii-b or iii)")))
    }
}

/// Key-player designs on the mixed pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyPlayerDgp {
    I,
    IIa,
    IIb,
    III,
    /// Stationary `a` against a persistent `c` with a small slope.
    IVa,
    /// Stationary `a` against a persistent `c` with a larger slope.
    IVb,
}

impl KeyPlayerDgp {
    pub const ALL: [KeyPlayerDgp; 6] = [
        KeyPlayerDgp::I,
        KeyPlayerDgp::IIa,
        KeyPlayerDgp::IIb,
        KeyPlayerDgp::III,
        KeyPlayerDgp::IVa,
        KeyPlayerDgp::IVb,
    ];

    /// `(beta_a, beta_b, beta_c, beta_d)` local-to-null slopes.
    pub fn slopes(self) -> [f64; 4] {
        match self {
            KeyPlayerDgp::I => [3.0, 6.0, 0.0, 0.0],
            KeyPlayerDgp::IIa => [0.0, 0.0, 5.0, 8.0],
            KeyPlayerDgp::IIb => [0.0, 0.0, 7.0, 10.0],
            KeyPlayerDgp::III => [3.0, 6.0, 3.0, 6.0],
            KeyPlayerDgp::IVa => [2.0, 0.0, 6.0, 0.0],
            KeyPlayerDgp::IVb => [2.0, 0.0, 13.0, 0.0],
        }
    }

    pub fn design(self, n: usize, p: usize) -> Result<DgpSpec> {
        mixed_design(n, p, self.slopes())
    }

    pub fn label(self) -> &'static str {
        match self {
            KeyPlayerDgp::I => "i",
            KeyPlayerDgp::IIa => "ii-a",
            KeyPlayerDgp::IIb => "ii-b",
            KeyPlayerDgp::III => "iii",
            KeyPlayerDgp::IVa => "iv-a",
            KeyPlayerDgp::IVb => "iv-b",
        }
    }
}

impl FromStr for KeyPlayerDgp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KeyPlayerDgp::ALL
            .into_iter()
            .find(|d| d.label() == s.to_ascii_lowercase().trim_matches(|c| c == '(' || c == ')'))
            .ok_or_else(|| param_err(format!("unknown key-player design '{s}'")))
    }
}

/// Scheme C pool with `p1 = p / 2`, covariance `Omega2` and actives `a`, `b`
/// (columns 0, 1) and `c`, `d` (columns `p1`, `p1 + 1`). Zero slopes are left
/// out of the active set.
pub fn mixed_design(n: usize, p: usize, slopes: [f64; 4]) -> Result<DgpSpec> {
    let p1 = p / 2;
    if p1 < 2 || p - p1 < 2 {
        return Err(param_err(format!("the mixed pool needs p >= 4, got {p}")));
    }
    let columns = [0, 1, p1, p1 + 1];
    let rates = [STATIONARY, STATIONARY, PERSISTENT, PERSISTENT];
    let active = (0..4)
        .filter(|&k| slopes[k] != 0.0)
        .map(|k| ActivePredictor { index: columns[k], beta_star: slopes[k], rate: rates[k] })
        .collect();
    Ok(DgpSpec::null(n, p, PhiScheme::C { p1 }, OmegaScheme::Omega2).with_active(active))
}

/// Local-power inputs matching a design without mild-integration overrides.
///
/// Columns at the stationary coefficient form the stationary block with
/// moments from the VAR(1) stationary covariance; columns at the persistent
/// coefficient form the persistent block, with `c` solved from
/// `rho = 1 - c / n^alpha`. The stationary columns must come first.
pub fn local_power_inputs(spec: &DgpSpec, mu0: f64, pi0: f64) -> Result<LocalPowerInputs> {
    if spec.mildly_integrated.is_some() {
        return Err(param_err("designs with mild-integration overrides are not supported"));
    }
    let phi = spec.phi_scheme.coefficients(spec.p);
    let p1 = phi.iter().take_while(|&&f| f == STATIONARY_AR).count();
    if phi[p1..].iter().any(|&f| f != PERSISTENT_AR) {
        return Err(param_err("stationary predictors must precede persistent ones"));
    }
    let omega = spec.omega_scheme.matrix(spec.p, spec.sigma_u_sq);
    let sigma = |range: std::ops::Range<usize>| -> Vec<Vec<f64>> {
        range.clone().map(|i| range.clone().map(|j| omega[(i + 1, j + 1)]).collect()).collect()
    };
    let mut inputs = LocalPowerInputs {
        mu0,
        pi0,
        phi_sq: GAUSSIAN_PHI_SQ * spec.sigma_u_sq * spec.sigma_u_sq,
        stationary: None,
        persistent: None,
        active_stationary: Vec::new(),
        active_persistent: Vec::new(),
    };
    if p1 > 0 {
        let moments = var1_stationary_covariance(&phi[..p1], &sigma(0..p1))?;
        inputs.stationary = Some(crate::theory::StationaryBlock { moments });
    }
    if p1 < spec.p {
        let c = localizing_constant(PERSISTENT_AR, spec.n, PERSISTENCE_ALPHA);
        inputs.persistent = Some(crate::theory::PersistentBlock {
            c: vec![c; spec.p - p1],
            sigma_v: sigma(p1..spec.p),
        });
    }
    for a in &spec.active {
        if a.index < p1 {
            inputs.active_stationary.push((a.index, a.beta_star));
        } else {
            inputs.active_persistent.push((a.index - p1, a.beta_star));
        }
    }
    Ok(inputs)
}
