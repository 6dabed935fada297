//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL/SKIP line per criterion and exits non-zero if any fails.
//!
//! The empirical criterion needs a FRED-MD vintage: point
//! `SPLITMSE_FREDMD_PATH` at the CSV (optionally `SPLITMSE_FREDMD_PREDICTORS`
//! with a comma-separated predictor list; default is every series except the
//! target).

use std::collections::BTreeSet;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use splitmse::config::validate_mu0;
use splitmse::data::{build_dataset, read_fredmd, DatasetOptions, Month};
use splitmse::dgp::scenarios::{local_power_inputs, KeyPlayerDgp, PowerDgp, SizeScenario};
use splitmse::dgp::{
    run_keyplayer_experiment, run_power_experiment, run_size_experiment, simulate_replications,
    ActivePredictor, DgpSpec, McSettings, OmegaScheme, PhiScheme, SlopeRate,
};
use splitmse::forecast::{marginal_forecast_errors, RecursiveOls};
use splitmse::keyplayer::{key_player_report, RankBy};
use splitmse::numeric::mean_sd;
use splitmse::stats::{enhancement_term, pairwise_stat, pairwise_stat_from_squares};
use splitmse::theory::noncentrality_stationary;
use splitmse::variance::lrv_alt;
use splitmse::{aggregate_stats, forecast_error_panel, EvalConfig, SeriesSample, VarianceSource};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn normal_cdf(x: f64) -> f64 {
    1.0 - splitmse::stats::normal_upper_tail(x)
}

/// Kolmogorov-Smirnov distance between a sample and the standard normal.
fn ks_distance(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample KS statistic with a fully specified
/// null: asymptotic Kolmogorov quantile 1.6276 with Stephens' small-sample
/// correction.
fn ks_critical_1pct(n: usize) -> f64 {
    let r = (n as f64).sqrt();
    1.6276 / (r + 0.12 + 0.11 / r)
}

fn null_distribution() -> Verdict {
    let spec = DgpSpec::null(2000, 5, PhiScheme::A, OmegaScheme::Omega0);
    let settings = McSettings::new("null-distribution", 2000, 101);
    let prep = spec.prepare().expect("valid design");
    let reps = simulate_replications(&prep, &[0.35], &settings).expect("simulation runs");
    let draws: Vec<f64> = reps.iter().map(|r| r[0].aggregate_enhanced).collect();
    let (m, sd) = mean_sd(&draws);
    let ks = ks_distance(&draws);
    let crit = ks_critical_1pct(draws.len());
    verdict(
        ks <= crit && m.abs() <= 0.07 && (0.93..=1.07).contains(&sd),
        format!("KS = {ks:.4} (1% critical {crit:.4}), mean = {m:.4}, sd = {sd:.4}"),
    )
}

fn size() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, p, seed) in [("A-i", 10, 201), ("B-ii", 50, 202)] {
        let scenario: SizeScenario = label.parse().expect("known scenario");
        let settings = McSettings::new(label, 2000, seed);
        let summary = run_size_experiment(&scenario.design(500, p), &[0.30, 0.35], &settings).expect("simulation runs");
        for e in &summary.entries {
            let f = e.rejection_freq_enhanced;
            ok &= (0.085..=0.125).contains(&f);
            parts.push(format!("{label} p={p} mu0={:.2}: {f:.4}", e.mu0));
        }
    }
    verdict(ok, parts.join("; "))
}

fn power() -> Verdict {
    let cases = [
        (PowerDgp::I, 0, 500, 301, 0.99, 1.0),
        (PowerDgp::IIa, 3, 1000, 302, 0.70, 0.80),
        (PowerDgp::IIb, 3, 1000, 303, 0.89, 0.95),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (dgp, column, reps, seed, lo, hi) in cases {
        let spec = dgp.design(column, 500, 100).expect("valid design");
        let settings = McSettings::new(dgp.label(), reps, seed);
        let summary = run_power_experiment(&spec, &[0.45], &settings).expect("simulation runs");
        let f = summary.entries[0].rejection_freq_enhanced;
        ok &= f >= lo && f <= hi;
        parts.push(format!("({}) column {}: {f:.4} in [{lo}, {hi}]", dgp.label(), column + 1));
    }
    verdict(ok, parts.join("; "))
}

fn key_player_detection() -> Verdict {
    let cases = [
        (KeyPlayerDgp::I, "x2", 401, 0.99, 1.0),
        (KeyPlayerDgp::IVa, "x1", 402, 0.97, 1.0),
        (KeyPlayerDgp::IVb, "x51", 403, 0.82, 0.91),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (dgp, name, seed, lo, hi) in cases {
        let spec = dgp.design(500, 100).expect("valid design");
        let settings = McSettings::new(dgp.label(), 500, seed);
        let summary = &run_keyplayer_experiment(&spec, &[500], &[0.30], &settings).expect("simulation runs")[0];
        let f = summary.entries[0].keyplayer_freq[name];
        ok &= f >= lo && f <= hi;
        parts.push(format!("({}) freq({name}) = {f:.4} in [{lo}, {hi}]", dgp.label()));
    }
    verdict(ok, parts.join("; "))
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn enhanced_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..100 {
        let n = rng.random_range(40..400);
        let p = rng.random_range(1..8);
        let mu0 = [0.3, 0.35, 0.4, 0.45][rng.random_range(0..4)];
        let y = gaussian(&mut rng, n);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let x = gaussian(&mut rng, n);
                let beta: f64 = rng.random_range(-1.0..1.0);
                x.iter().map(|v| beta * v).collect()
            })
            .collect();
        let sample = SeriesSample::unnamed(y, cols).expect("valid sample");
        let cfg = EvalConfig::with_defaults(n, 0.25, mu0).expect("valid config");
        let panel = forecast_error_panel(&sample, &cfg).expect("panel");
        let stats = aggregate_stats(&panel, &cfg).expect("stats");
        let e0 = panel.e0();
        let sq0: Vec<f64> = e0.iter().map(|e| e * e).collect();
        for j in 0..p {
            let ej = panel.column(j);
            let omega = lrv_alt(ej, mu0).expect("normalizer");
            let adjusted: Vec<f64> = e0.iter().zip(ej).map(|(a, b)| b * b - (a - b) * (a - b)).collect();
            let lhs = pairwise_stat_from_squares(&sq0, &adjusted, cfg.m0(), &omega).expect("stat");
            let rhs = pairwise_stat(e0, ej, cfg.m0(), &omega).expect("stat")
                + enhancement_term(e0, ej, &omega).expect("enhancement");
            for other in [rhs, stats.d_enhanced[j]] {
                worst = worst.max((lhs - other).abs() / lhs.abs().max(other.abs()).max(1e-300));
            }
            checked += 1;
        }
    }
    verdict(worst <= 1e-10, format!("{checked} predictors, max relative gap {worst:.2e}"))
}

/// Least-squares fit of `y[s]` on `(1, x[s-1])`, `s < t`, by SVD of the design.
fn svd_fit(y: &[f64], x: &[f64], t: usize) -> (f64, f64) {
    let rows = t - 1;
    let design = DMatrix::from_fn(rows, 2, |r, c| if c == 0 { 1.0 } else { x[r] });
    let rhs = DVector::from_fn(rows, |r, _| y[r + 1]);
    let sol = design.svd(true, true).solve(&rhs, 1e-14).expect("svd solve");
    (sol[0], sol[1])
}

fn recursive_vs_batch() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    for _ in 0..50 {
        let n = rng.random_range(20..200);
        let phi: f64 = rng.random_range(0.0..0.95);
        let level: f64 = rng.random_range(-10.0..10.0);
        let mut x = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
            x.push(prev + level);
        }
        let beta: f64 = rng.random_range(-2.0..2.0);
        let y: Vec<f64> = (0..n)
            .map(|t| {
                let signal = if t == 0 { 0.0 } else { beta * x[t - 1] };
                signal + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let mut ols = RecursiveOls::new();
        for t in 2..n {
            ols.push(x[t - 2], y[t - 1]);
            if t < 3 {
                continue;
            }
            let (a, b) = ols.coefficients(t).expect("non-degenerate regressor");
            let (ba, bb) = svd_fit(&y, &x, t);
            worst = worst
                .max((a - ba).abs() / ba.abs().max(1.0))
                .max((b - bb).abs() / bb.abs().max(1.0));
            steps += 1;
        }
    }
    verdict(worst <= 1e-8, format!("{steps} recursion steps, max relative gap {worst:.2e}"))
}

fn noncentrality() -> Verdict {
    let spec = DgpSpec::null(2000, 5, PhiScheme::A, OmegaScheme::Omega0)
        .with_active(vec![ActivePredictor { index: 0, beta_star: 2.0, rate: SlopeRate::Stationary }]);
    let q = noncentrality_stationary(&local_power_inputs(&spec, 0.35, 0.25).expect("inputs")).expect("Q");
    let prep = spec.prepare().expect("valid design");
    let settings = McSettings::new("noncentrality", 2000, 701);
    let reps = simulate_replications(&prep, &[0.35], &settings).expect("simulation runs");
    let raw: Vec<f64> = reps.iter().map(|r| r[0].aggregate_raw).collect();
    let gap: Vec<f64> = reps.iter().map(|r| r[0].aggregate_enhanced - r[0].aggregate_raw).collect();
    let root = (reps.len() as f64).sqrt();
    let (m_raw, sd_raw) = mean_sd(&raw);
    let (m_gap, sd_gap) = mean_sd(&gap);
    let band_raw = 3.0 * sd_raw / root + 0.1;
    let band_gap = 3.0 * sd_gap / root + 0.1;
    verdict(
        (m_raw - q).abs() <= band_raw && (m_gap - q).abs() <= band_gap,
        format!(
            "Q = {q:.4}; mean raw = {m_raw:.4} (band {band_raw:.4}); mean enhanced - raw = {m_gap:.4} (band {band_gap:.4})"
        ),
    )
}

fn degeneracy_guards() -> Verdict {
    let mut problems = Vec::new();
    for mu0 in [0.0, 0.5, 1.0] {
        if validate_mu0(mu0).is_ok() || EvalConfig::with_defaults(200, 0.25, mu0).is_ok() {
            problems.push(format!("mu0 = {mu0} accepted"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(801);
    let n = 200;
    let y = gaussian(&mut rng, n);
    let sample = SeriesSample::unnamed(y.clone(), vec![vec![3.25; n], gaussian(&mut rng, n)]).expect("sample");
    let cfg = EvalConfig::with_defaults(n, 0.25, 0.35).expect("config");
    let panel = forecast_error_panel(&sample, &cfg).expect("panel");
    if !panel.degenerate(0).iter().all(|&d| d) {
        problems.push("constant column not flagged".into());
    }
    if panel.column(0) != panel.e0() {
        problems.push("constant column did not fall back to the benchmark".into());
    }
    let direct = marginal_forecast_errors(&y, &vec![3.25; n], cfg.k0()).expect("errors");
    if direct.errors.iter().any(|e| !e.is_finite()) {
        problems.push("non-finite fallback errors".into());
    }
    match aggregate_stats(&panel, &cfg) {
        Ok(s) if s.d_raw.iter().chain(&s.d_enhanced).all(|v| v.is_finite()) && s.pvalue_enhanced.is_finite() => {}
        Ok(_) => problems.push("non-finite statistics".into()),
        Err(e) => problems.push(format!("statistics failed: {e}")),
    }
    if problems.is_empty() {
        Verdict::Pass("mu0 in {0, 0.5, 1} rejected; constant predictor flagged with finite fallback".into())
    } else {
        Verdict::Fail(problems.join("; "))
    }
}

fn empirical() -> Verdict {
    let Ok(path) = std::env::var("SPLITMSE_FREDMD_PATH") else {
        return Verdict::Skip("set SPLITMSE_FREDMD_PATH to a FRED-MD vintage to run".into());
    };
    let panel = match read_fredmd(&path) {
        Ok(p) => p,
        Err(e) => return Verdict::Fail(format!("cannot read {path}: {e}")),
    };
    let target = "INDPRO";
    let predictors: Vec<String> = match std::env::var("SPLITMSE_FREDMD_PREDICTORS") {
        Ok(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        Err(_) => panel.names.iter().filter(|n| *n != target).cloned().collect(),
    };
    let options = DatasetOptions { start: None, end: Some(Month { year: 2014, month: 12 }) };
    let ds = match build_dataset(&panel, target, &predictors, options) {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(format!("dataset: {e}")),
    };
    let n = ds.sample.n();
    let mut problems = Vec::new();
    let mut top6 = BTreeSet::new();
    for mu0 in [0.30, 0.35, 0.40, 0.45] {
        for source in [VarianceSource::Null, VarianceSource::Alternative] {
            let cfg = EvalConfig::new(n, 0.25, mu0, source, None).expect("config");
            let stats = match forecast_error_panel(&ds.sample, &cfg).and_then(|p| aggregate_stats(&p, &cfg)) {
                Ok(s) => s,
                Err(e) => return Verdict::Fail(format!("statistics: {e}")),
            };
            if stats.pvalue_enhanced >= 0.01 {
                problems.push(format!("enhanced p-value {:.4} at mu0 {mu0} ({source})", stats.pvalue_enhanced));
            }
            let report = key_player_report(&stats, 6, RankBy::Enhanced).expect("report");
            for j in [report.j_hat, report.j_hat_enhanced] {
                if stats.names[j] != "NAPMNOI" {
                    problems.push(format!("key player {} at mu0 {mu0} ({source})", stats.names[j]));
                }
            }
            if mu0 == 0.30 && source == VarianceSource::Alternative {
                top6 = report.top_k.iter().map(|r| r.name.clone()).collect();
            }
        }
    }
    let expected: BTreeSet<String> =
        ["NAPMNOI", "T1YFFM", "TB6SMFFM", "BAA", "COMPAPFFx", "NDMANEMP"].iter().map(|s| s.to_string()).collect();
    if !expected.is_subset(&top6) {
        problems.push(format!("top six {top6:?}"));
    }
    if problems.is_empty() {
        Verdict::Pass(format!("n = {n}, enhanced p-values < 0.01, key player NAPMNOI, top six as expected"))
    } else {
        Verdict::Fail(format!("n = {n}; {}", problems.join("; ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("null-distribution", null_distribution),
        ("size", size),
        ("power", power),
        ("key-player-detection", key_player_detection),
        ("enhanced-identity", enhanced_identity),
        ("recursive-vs-batch-ols", recursive_vs_batch),
        ("noncentrality", noncentrality),
        ("degeneracy-guards", degeneracy_guards),
        ("empirical-application", empirical),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
        std::io::stdout().flush().ok();
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
