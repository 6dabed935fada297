use std::path::Path;

use serde::Serialize;
use splitmse::dgp::scenarios::{mixed_design, KeyPlayerDgp, PowerDgp, SizeScenario, POWER_N, POWER_P};
use splitmse::dgp::{
    run_keyplayer_experiment, run_power_experiment, run_size_experiment, DgpSpec, McSettings, McSummary,
    PhiScheme, OTHER_BUCKET,
};

use crate::error::CliError;
use crate::manifest::{read_manifest, Manifest};
use crate::output::{emit, fmt3, render_table, strings, SCHEMA};
use crate::Common;

const DEFAULT_N: usize = 500;
const DEFAULT_REPS: usize = 1000;
const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Size,
    Power,
    KeyPlayer,
}

#[derive(Serialize)]
struct Setup {
    scenario: String,
    p: usize,
    reps: usize,
    master_seed: u64,
    pi0: f64,
    nominal: f64,
    variance: splitmse::VarianceSource,
    bandwidth: Option<usize>,
    burn_in: usize,
    mu0: Vec<f64>,
}

#[derive(Serialize)]
struct PowerColumn {
    /// 1-based slope column.
    column: usize,
    slopes: [f64; 4],
    summary: McSummary,
}

#[derive(Serialize)]
struct SimReport<T> {
    schema: &'static str,
    command: &'static str,
    setup: Setup,
    results: T,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn settings(m: &Manifest, common: &Common) -> Result<McSettings, CliError> {
    let reps = common.reps.or(m.reps).unwrap_or(DEFAULT_REPS);
    if reps == 0 {
        return Err(usage("reps must be at least 1"));
    }
    let mut s = McSettings::new(m.scenario.clone(), reps, common.seed.or(m.seed).unwrap_or(DEFAULT_SEED));
    s.pi0 = common.pi0;
    s.variance_source = common.variance;
    s.bandwidth = common.bandwidth;
    if let Some(nominal) = m.nominal {
        if !(nominal > 0.0 && nominal < 1.0) {
            return Err(usage(format!("nominal = {nominal} must lie strictly inside (0, 1)")));
        }
        s.nominal = nominal;
    }
    Ok(s)
}

fn with_burn_in(mut spec: DgpSpec, m: &Manifest) -> DgpSpec {
    if let Some(b) = m.burn_in {
        spec.burn_in = b;
    }
    spec
}

/// The mixed pool always splits at `p / 2`.
fn check_mixed_p1(m: &Manifest, p: usize) -> Result<(), CliError> {
    match m.p1 {
        Some(p1) if p1 != p / 2 => Err(usage(format!("mixed designs split the pool at p / 2 = {}, manifest sets p1 = {p1}", p / 2))),
        _ => Ok(()),
    }
}

fn setup(m: &Manifest, s: &McSettings, spec: &DgpSpec, mu0: &[f64]) -> Setup {
    Setup {
        scenario: m.scenario.clone(),
        p: spec.p,
        reps: s.reps,
        master_seed: s.master_seed,
        pi0: s.pi0,
        nominal: s.nominal,
        variance: s.variance_source,
        bandwidth: s.bandwidth,
        burn_in: spec.burn_in,
        mu0: mu0.to_vec(),
    }
}

pub fn cmd_simulate(kind: Kind, manifest: &Path, common: &Common) -> Result<(), CliError> {
    let m = read_manifest(manifest)?;
    let mu0 = common.mu0_or(m.mu0.as_deref())?;
    let s = settings(&m, common)?;
    match kind {
        Kind::Size => size(&m, &s, &mu0, common),
        Kind::Power => power(&m, &s, &mu0, common),
        Kind::KeyPlayer => keyplayer(&m, &s, &mu0, common),
    }
}

fn size(m: &Manifest, s: &McSettings, mu0: &[f64], common: &Common) -> Result<(), CliError> {
    if m.slopes.is_some() || m.n_list.is_some() {
        return Err(usage("size manifests take no slopes or n_list"));
    }
    let scenario: SizeScenario = m.scenario.parse().map_err(|e| usage(format!("{e}")))?;
    let n = m.n.unwrap_or(DEFAULT_N);
    let p = m.p.ok_or_else(|| usage("size manifests must set p"))?;
    let mut spec = with_burn_in(scenario.design(n, p), m);
    if let Some(p1) = m.p1 {
        if scenario.phi != 'C' {
            return Err(usage("p1 applies to persistence scheme C only"));
        }
        spec.phi_scheme = PhiScheme::C { p1 };
    }
    eprintln!("size {scenario}: n = {n}, p = {p}, {} replications", s.reps);
    let summary = run_size_experiment(&spec, mu0, s)?;

    let mut table = format!("empirical size, scenario {scenario}, n = {n}, p = {p}, nominal {}\n", s.nominal);
    let rows: Vec<Vec<String>> = summary
        .entries
        .iter()
        .map(|e| {
            vec![
                format!("{:.2}", e.mu0),
                fmt3(e.rejection_freq_raw),
                fmt3(e.rejection_freq_enhanced),
                fmt3(e.mean_stat_enhanced),
                fmt3(e.sd_stat_enhanced),
            ]
        })
        .collect();
    table.push_str(&render_table(&strings(["mu0", "raw", "enhanced", "mean (enh.)", "sd (enh.)"]), &rows));

    let report = SimReport { schema: SCHEMA, command: "simulate-size", setup: setup(m, s, &spec, mu0), results: summary };
    emit(
        common,
        &report,
        |w| {
            w.write_record([
                "scenario", "n", "p", "mu0", "reps", "rejection_raw", "rejection_enhanced", "mean_raw", "sd_raw",
                "mean_enhanced", "sd_enhanced",
            ])?;
            for e in &report.results.entries {
                w.write_record([
                    scenario.to_string(),
                    n.to_string(),
                    p.to_string(),
                    e.mu0.to_string(),
                    report.results.reps.to_string(),
                    e.rejection_freq_raw.to_string(),
                    e.rejection_freq_enhanced.to_string(),
                    e.mean_stat_raw.to_string(),
                    e.sd_stat_raw.to_string(),
                    e.mean_stat_enhanced.to_string(),
                    e.sd_stat_enhanced.to_string(),
                ])?;
            }
            Ok(())
        },
        &table,
    )
}

fn slope_label(slopes: &[f64; 4]) -> String {
    let parts: Vec<String> = slopes.iter().map(|b| b.to_string()).collect();
    format!("({})", parts.join(","))
}

fn power(m: &Manifest, s: &McSettings, mu0: &[f64], common: &Common) -> Result<(), CliError> {
    if m.n_list.is_some() {
        return Err(usage("power manifests take n, not n_list"));
    }
    let grid: Vec<[f64; 4]> = match &m.slopes {
        Some(slopes) => slopes.rows(),
        None => {
            let dgp: PowerDgp = m.scenario.parse().map_err(|e| usage(format!("{e}")))?;
            dgp.slope_grid().to_vec()
        }
    };
    if grid.is_empty() {
        return Err(usage("slopes must list at least one column"));
    }
    let n = m.n.unwrap_or(POWER_N);
    let p = m.p.unwrap_or(POWER_P);
    check_mixed_p1(m, p)?;
    let mut columns = Vec::new();
    for (k, slopes) in grid.iter().enumerate() {
        let spec = with_burn_in(mixed_design(n, p, *slopes)?, m);
        if spec.active.is_empty() {
            return Err(usage(format!("slope column {} is all zero", k + 1)));
        }
        eprintln!("power {} column {}/{} {}: {} replications", m.scenario, k + 1, grid.len(), slope_label(slopes), s.reps);
        columns.push((spec.clone(), PowerColumn { column: k + 1, slopes: *slopes, summary: run_power_experiment(&spec, mu0, s)? }));
    }

    let enhanced = common.enhanced;
    let mut table = format!(
        "empirical power ({} statistic), design {}, n = {n}, p = {p}, nominal {}\n",
        if enhanced { "enhanced" } else { "raw" },
        m.scenario,
        s.nominal
    );
    let mut header = strings(["mu0 \\ (a,b,c,d)"]);
    header.extend(columns.iter().map(|(_, c)| slope_label(&c.slopes)));
    let rows: Vec<Vec<String>> = mu0
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let mut row = vec![format!("{mu:.2}")];
            row.extend(columns.iter().map(|(_, c)| {
                let e = &c.summary.entries[i];
                fmt3(if enhanced { e.rejection_freq_enhanced } else { e.rejection_freq_raw })
            }));
            row
        })
        .collect();
    table.push_str(&render_table(&header, &rows));

    let spec0 = columns[0].0.clone();
    let results: Vec<PowerColumn> = columns.into_iter().map(|(_, c)| c).collect();
    let report = SimReport { schema: SCHEMA, command: "simulate-power", setup: setup(m, s, &spec0, mu0), results };
    emit(
        common,
        &report,
        |w| {
            w.write_record([
                "scenario", "column", "beta_a", "beta_b", "beta_c", "beta_d", "n", "p", "mu0", "reps", "rejection_raw",
                "rejection_enhanced",
            ])?;
            for c in &report.results {
                for e in &c.summary.entries {
                    let mut rec = vec![m.scenario.clone(), c.column.to_string()];
                    rec.extend(c.slopes.iter().map(f64::to_string));
                    rec.extend([
                        n.to_string(),
                        p.to_string(),
                        e.mu0.to_string(),
                        c.summary.reps.to_string(),
                        e.rejection_freq_raw.to_string(),
                        e.rejection_freq_enhanced.to_string(),
                    ]);
                    w.write_record(&rec)?;
                }
            }
            Ok(())
        },
        &table,
    )
}

fn keyplayer(m: &Manifest, s: &McSettings, mu0: &[f64], common: &Common) -> Result<(), CliError> {
    let slopes = match &m.slopes {
        Some(rows) => match rows.rows()[..] {
            [row] => row,
            _ => return Err(usage("key-player manifests take a single slope row")),
        },
        None => {
            let dgp: KeyPlayerDgp = m.scenario.parse().map_err(|e| usage(format!("{e}")))?;
            dgp.slopes()
        }
    };
    let n_list = match (m.n, &m.n_list) {
        (Some(_), Some(_)) => return Err(usage("set either n or n_list, not both")),
        (_, Some(list)) if list.is_empty() => return Err(usage("n_list is empty")),
        (_, Some(list)) => list.clone(),
        (n, None) => vec![n.unwrap_or(DEFAULT_N)],
    };
    let p = m.p.unwrap_or(POWER_P);
    check_mixed_p1(m, p)?;
    let spec = with_burn_in(mixed_design(n_list[0], p, slopes)?, m);
    if spec.active.is_empty() {
        return Err(usage("the slope row is all zero"));
    }
    eprintln!("key player {} {}: n in {n_list:?}, {} replications each", m.scenario, slope_label(&slopes), s.reps);
    let summaries = run_keyplayer_experiment(&spec, &n_list, mu0, s)?;

    let mut active: Vec<usize> = spec.active.iter().map(|a| a.index).collect();
    active.sort_unstable();
    let mut buckets: Vec<String> = active.iter().map(|j| format!("x{}", j + 1)).collect();
    buckets.push(OTHER_BUCKET.to_string());

    let mut table = format!("key-player detection frequency (enhanced statistic), design {}, p = {p}\n", m.scenario);
    let mut header = strings(["n", "mu0"]);
    header.extend(buckets.iter().cloned());
    let mut rows = Vec::new();
    for summary in &summaries {
        for e in &summary.entries {
            let mut row = vec![summary.n.to_string(), format!("{:.2}", e.mu0)];
            row.extend(buckets.iter().map(|b| fmt3(e.keyplayer_freq[b])));
            rows.push(row);
        }
    }
    table.push_str(&render_table(&header, &rows));

    let report =
        SimReport { schema: SCHEMA, command: "simulate-keyplayer", setup: setup(m, s, &spec, mu0), results: summaries };
    emit(
        common,
        &report,
        |w| {
            let mut head = strings(["scenario", "n", "p", "mu0", "reps"]);
            head.extend(buckets.iter().cloned());
            w.write_record(&head)?;
            for summary in &report.results {
                for e in &summary.entries {
                    let mut rec = vec![
                        m.scenario.clone(),
                        summary.n.to_string(),
                        p.to_string(),
                        e.mu0.to_string(),
                        summary.reps.to_string(),
                    ];
                    rec.extend(buckets.iter().map(|b| e.keyplayer_freq[b].to_string()));
                    w.write_record(&rec)?;
                }
            }
            Ok(())
        },
        &table,
    )
}
