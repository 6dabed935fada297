use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::simulate_sample;
use super::{DgpSpec, PreparedDgp};
use crate::config::{EvalConfig, VarianceSource};
use crate::error::{param_err, Result};
use crate::forecast::forecast_error_panel;
use crate::keyplayer::argmax;
use crate::numeric::mean_sd;
use crate::stats::{aggregate_stats, critical_value};

/// Key-player bucket for every predictor outside the active set.
pub const OTHER_BUCKET: &str = "other";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSettings {
    pub experiment_id: String,
    pub reps: usize,
    pub master_seed: u64,
    pub pi0: f64,
    pub nominal: f64,
    pub variance_source: VarianceSource,
    pub bandwidth: Option<usize>,
}

impl McSettings {
    pub fn new(experiment_id: impl Into<String>, reps: usize, master_seed: u64) -> Self {
        McSettings {
            experiment_id: experiment_id.into(),
            reps,
            master_seed,
            pi0: 0.25,
            nominal: 0.10,
            variance_source: VarianceSource::Alternative,
            bandwidth: None,
        }
    }
}

/// Aggregates and argmax indices of one replication at one split fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepOutcome {
    pub aggregate_raw: f64,
    pub aggregate_enhanced: f64,
    pub j_hat: usize,
    pub j_hat_enhanced: usize,
}

/// Results for one split fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEntry {
    pub mu0: f64,
    pub rejection_freq_raw: f64,
    pub rejection_freq_enhanced: f64,
    pub mean_stat_raw: f64,
    pub sd_stat_raw: f64,
    pub mean_stat_enhanced: f64,
    pub sd_stat_enhanced: f64,
    /// Frequency with which each active predictor (by name) maximized the
    /// enhanced statistic, plus [`OTHER_BUCKET`].
    pub keyplayer_freq: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub experiment_id: String,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub nominal_size: f64,
    pub master_seed: u64,
    pub variance_source: VarianceSource,
    pub entries: Vec<McEntry>,
}

impl McSummary {
    pub fn entry(&self, mu0: f64) -> Option<&McEntry> {
        self.entries.iter().find(|e| e.mu0 == mu0)
    }
}

fn configs(n: usize, mu0_list: &[f64], settings: &McSettings) -> Result<Vec<EvalConfig>> {
    if mu0_list.is_empty() {
        return Err(param_err("at least one split fraction is required"));
    }
    mu0_list
        .iter()
        .map(|&mu0| EvalConfig::new(n, settings.pi0, mu0, settings.variance_source, settings.bandwidth))
        .collect()
}

/// Runs every replication. `result[r][k]` belongs to replication `r` and
/// `mu0_list[k]`. Replication `r` draws from stream `r` of `master_seed`, and
/// the output is ordered by replication whatever the thread count.
pub fn simulate_replications(
    dgp: &PreparedDgp,
    mu0_list: &[f64],
    settings: &McSettings,
) -> Result<Vec<Vec<RepOutcome>>> {
    if settings.reps == 0 {
        return Err(param_err("at least one replication is required"));
    }
    let configs = configs(dgp.spec().n, mu0_list, settings)?;
    (0..settings.reps)
        .into_par_iter()
        .map(|rep| {
            let sample = simulate_sample(dgp, settings.master_seed, rep as u64)?;
            // The forecast errors depend on pi0 only, so one panel serves every mu0.
            let panel = forecast_error_panel(&sample, &configs[0])?;
            configs
                .iter()
                .map(|cfg| {
                    let stats = aggregate_stats(&panel, cfg)?;
                    let (j_hat, _) = argmax(&stats.d_raw).expect("non-empty pool");
                    let (j_hat_enhanced, _) = argmax(&stats.d_enhanced).expect("non-empty pool");
                    Ok(RepOutcome {
                        aggregate_raw: stats.aggregate_raw,
                        aggregate_enhanced: stats.aggregate_enhanced,
                        j_hat,
                        j_hat_enhanced,
                    })
                })
                .collect()
        })
        .collect()
}

/// Serial, order-fixed reduction of replication outcomes.
pub fn summarize(
    dgp: &PreparedDgp,
    mu0_list: &[f64],
    settings: &McSettings,
    outcomes: &[Vec<RepOutcome>],
) -> Result<McSummary> {
    let crit = critical_value(settings.nominal)?;
    let reps = outcomes.len();
    let tracked: Vec<usize> = dgp.spec().active.iter().map(|a| a.index).collect();
    let entries = mu0_list
        .iter()
        .enumerate()
        .map(|(k, &mu0)| {
            let raw: Vec<f64> = outcomes.iter().map(|o| o[k].aggregate_raw).collect();
            let enh: Vec<f64> = outcomes.iter().map(|o| o[k].aggregate_enhanced).collect();
            let freq = |v: &[f64]| v.iter().filter(|&&s| s > crit).count() as f64 / reps as f64;
            let (mean_raw, sd_raw) = mean_sd(&raw);
            let (mean_enh, sd_enh) = mean_sd(&enh);
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for &j in &tracked {
                counts.insert(format!("x{}", j + 1), 0);
            }
            counts.insert(OTHER_BUCKET.to_string(), 0);
            for o in outcomes {
                let j = o[k].j_hat_enhanced;
                let key = if tracked.contains(&j) { format!("x{}", j + 1) } else { OTHER_BUCKET.to_string() };
                *counts.get_mut(&key).expect("bucket exists") += 1;
            }
            McEntry {
                mu0,
                rejection_freq_raw: freq(&raw),
                rejection_freq_enhanced: freq(&enh),
                mean_stat_raw: mean_raw,
                sd_stat_raw: sd_raw,
                mean_stat_enhanced: mean_enh,
                sd_stat_enhanced: sd_enh,
                keyplayer_freq: counts.into_iter().map(|(k, c)| (k, c as f64 / reps as f64)).collect(),
            }
        })
        .collect();
    Ok(McSummary {
        experiment_id: settings.experiment_id.clone(),
        n: dgp.spec().n,
        p: dgp.spec().p,
        reps,
        nominal_size: settings.nominal,
        master_seed: settings.master_seed,
        variance_source: settings.variance_source,
        entries,
    })
}

fn run(dgp: &PreparedDgp, mu0_list: &[f64], settings: &McSettings) -> Result<McSummary> {
    let outcomes = simulate_replications(dgp, mu0_list, settings)?;
    summarize(dgp, mu0_list, settings, &outcomes)
}

/// Rejection frequencies under a design without active predictors.
pub fn run_size_experiment(spec: &DgpSpec, mu0_list: &[f64], settings: &McSettings) -> Result<McSummary> {
    if !spec.active.is_empty() {
        return Err(param_err("a size experiment needs a design without active predictors"));
    }
    run(&spec.prepare()?, mu0_list, settings)
}

/// Rejection frequencies under a design with active predictors.
pub fn run_power_experiment(spec: &DgpSpec, mu0_list: &[f64], settings: &McSettings) -> Result<McSummary> {
    if spec.active.is_empty() {
        return Err(param_err("a power experiment needs at least one active predictor"));
    }
    run(&spec.prepare()?, mu0_list, settings)
}

/// Key-player frequencies for each sample size in `n_list`; the slopes are
/// re-scaled to each `n`.
pub fn run_keyplayer_experiment(
    spec: &DgpSpec,
    n_list: &[usize],
    mu0_list: &[f64],
    settings: &McSettings,
) -> Result<Vec<McSummary>> {
    if spec.active.is_empty() {
        return Err(param_err("a key-player experiment needs at least one active predictor"));
    }
    n_list
        .iter()
        .map(|&n| run(&spec.with_n(n).prepare()?, mu0_list, settings))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{ActivePredictor, OmegaScheme, PhiScheme, SlopeRate};
    use super::*;

    fn null_spec() -> DgpSpec {
        let mut s = DgpSpec::null(120, 6, PhiScheme::A, OmegaScheme::Omega1);
        s.burn_in = 50;
        s
    }

    #[test]
    fn summary_invariants() {
        let spec = null_spec().with_active(vec![ActivePredictor { index: 2, beta_star: 1.0, rate: SlopeRate::Stationary }]);
        let settings = McSettings::new("t", 40, 11);
        let s = run_power_experiment(&spec, &[0.3, 0.4], &settings).unwrap();
        assert_eq!(s.entries.len(), 2);
        for e in &s.entries {
            assert!((0.0..=1.0).contains(&e.rejection_freq_raw));
            assert!((0.0..=1.0).contains(&e.rejection_freq_enhanced));
            assert!(e.rejection_freq_enhanced >= e.rejection_freq_raw);
            let total: f64 = e.keyplayer_freq.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(e.keyplayer_freq.keys().cloned().collect::<Vec<_>>(), vec!["other", "x3"]);
        }
        assert!(run_size_experiment(&spec, &[0.3], &settings).is_err());
        assert!(run_power_experiment(&null_spec(), &[0.3], &settings).is_err());
    }

    #[test]
    fn nominal_one_rejects_everything() {
        let mut settings = McSettings::new("t", 10, 3);
        settings.nominal = 1.0;
        let s = run_size_experiment(&null_spec(), &[0.35], &settings).unwrap();
        assert_eq!(s.entries[0].rejection_freq_raw, 1.0);
        assert_eq!(s.entries[0].rejection_freq_enhanced, 1.0);
    }

    #[test]
    fn identical_across_thread_counts() {
        let settings = McSettings::new("t", 24, 5);
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_size_experiment(&null_spec(), &[0.3, 0.45], &settings).unwrap())
        };
        assert_eq!(run_with(1), run_with(3));
    }

    #[test]
    fn invalid_inputs() {
        let settings = McSettings::new("t", 0, 5);
        assert!(run_size_experiment(&null_spec(), &[0.3], &settings).is_err());
        let settings = McSettings::new("t", 5, 5);
        assert!(run_size_experiment(&null_spec(), &[], &settings).is_err());
        assert!(run_size_experiment(&null_spec(), &[0.5], &settings).is_err());
    }

    #[test]
    fn keyplayer_over_sample_sizes() {
        let spec = null_spec().with_active(vec![ActivePredictor { index: 0, beta_star: 4.0, rate: SlopeRate::Stationary }]);
        let out = run_keyplayer_experiment(&spec, &[60, 120], &[0.4], &McSettings::new("kp", 20, 1)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].n, 60);
        assert!(out[1].entries[0].keyplayer_freq["x1"] > 0.5);
    }
}
