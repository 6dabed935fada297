//! Out-of-sample predictability testing for linear predictive regressions with
//! many candidate predictors.
//!
//! The pipeline is:
//!
//! 1. [`forecast`]: recursive expanding-window one-step-ahead forecast errors for
//!    an intercept-only benchmark and for every single-predictor model.
//! 2. [`variance`]: long-run variance normalizers for the pairwise statistics.
//! 3. [`stats`]: pairwise sample-split MSE statistics, their power-enhanced
//!    versions, the aggregate statistics and right-tail normal p-values.
//! 4. [`keyplayer`]: argmax screening of the predictor driving a rejection.
//!
//! [`dgp`] holds the simulation designs and the Monte Carlo harness, [`theory`]
//! the closed-form local-power noncentralities, and [`data`] the FRED-MD loader.

pub mod config;
pub mod data;
pub mod dgp;
pub mod error;
pub mod forecast;
pub mod keyplayer;
pub mod numeric;
pub mod stats;
pub mod theory;
pub mod variance;

pub use config::{EvalConfig, PredictorTiming, SeriesSample, VarianceSource};
pub use error::{Error, Result};
pub use forecast::{forecast_error_panel, ForecastErrorPanel};
pub use keyplayer::{key_player, top_k, KeyPlayerReport, RankBy, RankedPredictor};
pub use stats::{aggregate_stats, pvalue, PairwiseStats};
pub use variance::LrvEstimate;
