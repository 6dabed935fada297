//! Key-player screening: which predictor drives a rejection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{config_err, Error, Result};
use crate::stats::PairwiseStats;

/// Which per-predictor statistic orders a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankBy {
    Raw,
    #[default]
    Enhanced,
}

impl RankBy {
    fn values(self, stats: &PairwiseStats) -> &[f64] {
        match self {
            RankBy::Raw => &stats.d_raw,
            RankBy::Enhanced => &stats.d_enhanced,
        }
    }
}

impl fmt::Display for RankBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankBy::Raw => "raw",
            RankBy::Enhanced => "enhanced",
        })
    }
}

impl FromStr for RankBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(RankBy::Raw),
            "enhanced" => Ok(RankBy::Enhanced),
            other => Err(config_err(format!("unknown ranking '{other}' (expected raw or enhanced)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPredictor {
    /// 0-based column index.
    pub index: usize,
    pub name: String,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyPlayerReport {
    /// Argmax of the raw pairwise statistics (0-based).
    pub j_hat: usize,
    /// Argmax of the enhanced pairwise statistics (0-based).
    pub j_hat_enhanced: usize,
    pub top_k: Vec<RankedPredictor>,
    /// Either argmax was attained by more than one predictor.
    pub tie_flag: bool,
}

/// Index of the largest value, smallest index on ties, and whether a tie occurred.
pub fn argmax(values: &[f64]) -> Option<(usize, bool)> {
    let mut best: Option<(usize, f64)> = None;
    let mut tie = false;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b => {
                best = Some((i, v));
                tie = false;
            }
            Some((_, b)) if v == b => tie = true,
            _ => {}
        }
    }
    best.map(|(i, _)| (i, tie))
}

/// The `k` largest statistics in descending order. Equal statistics keep
/// column order, so the ranking is deterministic.
pub fn top_k(stats: &PairwiseStats, k: usize, rank: RankBy) -> Result<Vec<RankedPredictor>> {
    if k == 0 {
        return Err(config_err("top-k size must be at least 1"));
    }
    let values = rank.values(stats);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| RankedPredictor { index: i, name: stats.names[i].clone(), statistic: values[i] })
        .collect())
}

/// Key player under both statistics plus the top-`k` list.
pub fn key_player_report(stats: &PairwiseStats, k: usize, rank: RankBy) -> Result<KeyPlayerReport> {
    let (j_hat, tie_raw) =
        argmax(&stats.d_raw).ok_or_else(|| Error::Data("no predictors to screen".into()))?;
    let (j_hat_enhanced, tie_enh) =
        argmax(&stats.d_enhanced).ok_or_else(|| Error::Data("no predictors to screen".into()))?;
    Ok(KeyPlayerReport {
        j_hat,
        j_hat_enhanced,
        top_k: top_k(stats, k, rank)?,
        tie_flag: tie_raw || tie_enh,
    })
}

/// Key player with a single-entry ranking.
pub fn key_player(stats: &PairwiseStats) -> Result<KeyPlayerReport> {
    key_player_report(stats, 1, RankBy::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{EvalConfig, SeriesSample};
    use crate::forecast::forecast_error_panel;
    use crate::stats::aggregate_stats;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn fake_stats(d_raw: &[f64], enh: &[f64]) -> PairwiseStats {
        let sample = SeriesSample::unnamed(vec![0.0; 20].iter().enumerate().map(|(i, _)| i as f64 % 3.0).collect(), vec![(0..20).map(|i| (i * i % 7) as f64).collect(); d_raw.len()]).unwrap();
        let cfg = EvalConfig::with_defaults(20, 0.25, 0.3).unwrap();
        let mut stats = aggregate_stats(&forecast_error_panel(&sample, &cfg).unwrap(), &cfg).unwrap();
        stats.d_raw = d_raw.to_vec();
        stats.enhancement = enh.to_vec();
        stats.d_enhanced = d_raw.iter().zip(enh).map(|(a, b)| a + b).collect();
        stats
    }

    #[test]
    fn unique_maximum() {
        let s = fake_stats(&[0.1, 3.2, -1.0], &[0.0, 0.0, 5.0]);
        let r = key_player(&s).unwrap();
        assert_eq!(r.j_hat, 1);
        assert_eq!(r.j_hat_enhanced, 2);
        assert!(!r.tie_flag);
        assert_eq!(r.top_k[0].index, 2);
    }

    #[test]
    fn tie_goes_to_smallest_index() {
        let s = fake_stats(&[2.0, 2.0], &[0.0, 0.0]);
        let r = key_player(&s).unwrap();
        assert_eq!(r.j_hat, 0);
        assert!(r.tie_flag);
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0]), Some((1, true)));
        assert_eq!(argmax(&[3.0, 3.0, 4.0]), Some((2, false)));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn top_k_shapes() {
        let s = fake_stats(&[0.5, 1.5, -0.3, 0.9], &[0.1, 0.0, 2.0, 0.0]);
        let full = top_k(&s, 10, RankBy::Enhanced).unwrap();
        assert_eq!(full.len(), 4);
        assert_eq!(full.iter().map(|r| r.index).collect::<Vec<_>>(), vec![2, 1, 3, 0]);
        assert!(full.windows(2).all(|w| w[0].statistic >= w[1].statistic));
        let raw = top_k(&s, 2, RankBy::Raw).unwrap();
        assert_eq!(raw.iter().map(|r| r.index).collect::<Vec<_>>(), vec![1, 3]);
        let one = top_k(&s, 1, RankBy::Enhanced).unwrap();
        assert_eq!(one[0].index, key_player(&s).unwrap().j_hat_enhanced);
        assert_eq!(one[0].name, "x3");
        assert!(top_k(&s, 0, RankBy::Raw).is_err());
    }

    #[test]
    fn parse_rank_by() {
        assert_eq!("raw".parse::<RankBy>().unwrap(), RankBy::Raw);
        assert_eq!("Enhanced".parse::<RankBy>().unwrap(), RankBy::Enhanced);
        assert!("best".parse::<RankBy>().is_err());
    }

    fn signal_sample(n: usize, seed: u64, scale: &[(f64, f64)], perm: &[usize]) -> SeriesSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = perm.len();
        let cols: Vec<Vec<f64>> =
            (0..p).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let mut y = vec![0.0; n];
        for t in 1..n {
            let u: f64 = StandardNormal.sample(&mut rng);
            y[t] = 0.6 * cols[1][t - 1] + 0.3 * cols[3][t - 1] + u;
        }
        let out = perm
            .iter()
            .map(|&j| cols[j].iter().map(|v| scale[j].0 * v + scale[j].1).collect())
            .collect();
        SeriesSample::unnamed(y, out).unwrap()
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn affine_and_permutation_behaviour(
                seed in 0u64..1000,
                a in prop::collection::vec((0.1..10.0f64, -5.0..5.0f64), 5),
                flip in prop::collection::vec(any::<bool>(), 5),
            ) {
                let n = 160;
                let cfg = EvalConfig::with_defaults(n, 0.25, 0.35).unwrap();
                let ident: Vec<(f64, f64)> = vec![(1.0, 0.0); 5];
                let scaled: Vec<(f64, f64)> = a.iter().zip(&flip).map(|(&(s, b), &f)| (if f { -s } else { s }, b)).collect();
                let base = signal_sample(n, seed, &ident, &[0, 1, 2, 3, 4]);
                let affine = signal_sample(n, seed, &scaled, &[0, 1, 2, 3, 4]);
                let perm = [4, 2, 0, 1, 3];
                let permuted = signal_sample(n, seed, &ident, &perm);

                let report = |s: &SeriesSample| {
                    let st = aggregate_stats(&forecast_error_panel(s, &cfg).unwrap(), &cfg).unwrap();
                    key_player_report(&st, 5, RankBy::Enhanced).unwrap()
                };
                let r0 = report(&base);
                let r1 = report(&affine);
                let r2 = report(&permuted);
                prop_assert_eq!(r0.j_hat, r1.j_hat);
                prop_assert_eq!(r0.j_hat_enhanced, r1.j_hat_enhanced);
                prop_assert_eq!(perm[r2.j_hat], r0.j_hat);
                prop_assert_eq!(perm[r2.j_hat_enhanced], r0.j_hat_enhanced);
                let mut set0: Vec<usize> = r0.top_k.iter().take(3).map(|r| r.index).collect();
                let mut set2: Vec<usize> = r2.top_k.iter().take(3).map(|r| perm[r.index]).collect();
                set0.sort();
                set2.sort();
                prop_assert_eq!(set0, set2);
            }
        }
    }
}
