use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use splitmse::data::{build_dataset, read_fredmd, Dataset, DatasetOptions, RawPanel};
use splitmse::keyplayer::key_player_report;
use splitmse::{aggregate_stats, forecast_error_panel, EvalConfig, PairwiseStats, RankBy, VarianceSource};

use crate::error::CliError;
use crate::output::{emit, fmt3, render_table, strings, SCHEMA};
use crate::{Common, DataArgs, RankingArgs};

fn predictor_names(args: &DataArgs, panel: &RawPanel) -> Result<Vec<String>, CliError> {
    let listed: Vec<String> = match &args.predictors_file {
        Some(path) => fs::read_to_string(path)?
            .lines()
            .filter(|line| !line.trim_start().starts_with('#'))
            .flat_map(|line| line.split(','))
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => args.predictors.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
    };
    let names = if listed.len() == 1 && listed[0].eq_ignore_ascii_case("all") {
        panel.names.iter().filter(|n| **n != args.target).cloned().collect()
    } else {
        listed
    };
    if names.is_empty() {
        return Err(CliError::Usage("no predictors selected".into()));
    }
    for (k, name) in names.iter().enumerate() {
        if names[..k].contains(name) {
            return Err(CliError::Usage(format!("predictor '{name}' listed twice")));
        }
    }
    Ok(names)
}

fn load(args: &DataArgs) -> Result<Dataset, CliError> {
    let panel = read_fredmd(&args.data)?;
    let predictors = predictor_names(args, &panel)?;
    let options = DatasetOptions { start: args.start, end: args.end };
    let ds = build_dataset(&panel, &args.target, &predictors, options)?;
    eprintln!(
        "{}: {} aligned rows ({} to {}), {} predictors, {} rows dropped for missing values",
        args.data.display(),
        ds.sample.n(),
        ds.dates[0],
        ds.dates[ds.dates.len() - 1],
        ds.sample.p(),
        ds.dropped.len()
    );
    Ok(ds)
}

fn rank_by(common: &Common, ranking: &RankingArgs) -> RankBy {
    ranking.rank_by.unwrap_or(if common.enhanced { RankBy::Enhanced } else { RankBy::Raw })
}

fn normalizer_family(source: VarianceSource) -> [VarianceSource; 2] {
    if source.is_newey_west() {
        [VarianceSource::NeweyWestNull, VarianceSource::NeweyWestAlternative]
    } else {
        [VarianceSource::Null, VarianceSource::Alternative]
    }
}

#[derive(Serialize)]
struct SampleInfo {
    target: String,
    first_date: String,
    last_date: String,
    n: usize,
    k0: usize,
    window: usize,
    p: usize,
    pi0: f64,
    dropped_rows: usize,
    /// Predictors whose regressor was degenerate at some forecast origin
    /// (benchmark forecast used there).
    fallback_predictors: Vec<String>,
}

#[derive(Serialize)]
struct Ranked {
    rank: usize,
    /// 1-based column in the predictor list.
    index: usize,
    name: String,
    statistic: f64,
}

#[derive(Serialize)]
struct KeyPlayerRow {
    mu0: f64,
    variance: VarianceSource,
    key_player_raw: String,
    key_player_enhanced: String,
    tie_flag: bool,
    top_k: Vec<Ranked>,
}

#[derive(Serialize)]
struct GridRow {
    mu0: f64,
    variance: VarianceSource,
    m0: usize,
    bandwidth: Option<usize>,
    aggregate_raw: f64,
    pvalue_raw: f64,
    aggregate_enhanced: f64,
    pvalue_enhanced: f64,
    key_player_raw: String,
    key_player_enhanced: String,
}

#[derive(Serialize)]
struct TestReport {
    schema: &'static str,
    command: &'static str,
    sample: SampleInfo,
    headline: &'static str,
    grid: Vec<GridRow>,
    key_player: Vec<KeyPlayerRow>,
}

#[derive(Serialize)]
struct KeyPlayerReportOut {
    schema: &'static str,
    command: &'static str,
    sample: SampleInfo,
    rank_by: RankBy,
    rows: Vec<KeyPlayerRow>,
}

/// Statistics for every split fraction under each requested normalizer,
/// sharing one forecast-error panel.
struct Evaluation {
    info: SampleInfo,
    /// `(mu0, source, stats)` in request order.
    stats: Vec<(f64, VarianceSource, PairwiseStats)>,
}

fn evaluate(ds: &Dataset, common: &Common, sources: &[VarianceSource]) -> Result<Evaluation, CliError> {
    let mu0s = common.mu0_or(None)?;
    let base = EvalConfig::new(ds.sample.n(), common.pi0, mu0s[0], common.variance, common.bandwidth)?;
    let panel = forecast_error_panel(&ds.sample, &base)?;
    let fallback_predictors: Vec<String> = (0..panel.p())
        .filter(|&j| panel.degenerate(j).iter().any(|&d| d))
        .map(|j| panel.names()[j].clone())
        .collect();
    if !fallback_predictors.is_empty() {
        eprintln!(
            "warning: {} predictor(s) fell back to the benchmark forecast at some origin: {}",
            fallback_predictors.len(),
            fallback_predictors.join(", ")
        );
    }
    let mut stats = Vec::new();
    for &mu0 in &mu0s {
        for &source in sources {
            let cfg = base.with_mu0(mu0)?.with_variance_source(source);
            stats.push((mu0, source, aggregate_stats(&panel, &cfg)?));
        }
    }
    let info = SampleInfo {
        target: ds.target.clone(),
        first_date: ds.dates[0].to_string(),
        last_date: ds.dates[ds.dates.len() - 1].to_string(),
        n: base.n(),
        k0: base.k0(),
        window: base.window(),
        p: ds.sample.p(),
        pi0: common.pi0,
        dropped_rows: ds.dropped.len(),
        fallback_predictors,
    };
    Ok(Evaluation { info, stats })
}

fn key_player_row(mu0: f64, source: VarianceSource, stats: &PairwiseStats, k: usize, rank: RankBy) -> Result<KeyPlayerRow, CliError> {
    let report = key_player_report(stats, k, rank)?;
    Ok(KeyPlayerRow {
        mu0,
        variance: source,
        key_player_raw: stats.names[report.j_hat].clone(),
        key_player_enhanced: stats.names[report.j_hat_enhanced].clone(),
        tie_flag: report.tie_flag,
        top_k: report
            .top_k
            .into_iter()
            .enumerate()
            .map(|(r, p)| Ranked { rank: r + 1, index: p.index + 1, name: p.name, statistic: p.statistic })
            .collect(),
    })
}

fn sample_line(info: &SampleInfo) -> String {
    format!(
        "target {}, {} to {}: n = {}, k0 = {}, N = {}, p = {}\n",
        info.target, info.first_date, info.last_date, info.n, info.k0, info.window, info.p
    )
}

pub fn cmd_test(data: &DataArgs, common: &Common, ranking: &RankingArgs) -> Result<(), CliError> {
    let ds = load(data)?;
    let family = normalizer_family(common.variance);
    let eval = evaluate(&ds, common, &family)?;
    let rank = rank_by(common, ranking);

    let mut grid = Vec::new();
    let mut key_player = Vec::new();
    for (mu0, source, stats) in &eval.stats {
        let row = key_player_row(*mu0, *source, stats, ranking.top_k, rank)?;
        grid.push(GridRow {
            mu0: *mu0,
            variance: *source,
            m0: stats.config.m0(),
            bandwidth: source.is_newey_west().then(|| stats.config.effective_bandwidth()),
            aggregate_raw: stats.aggregate_raw,
            pvalue_raw: stats.pvalue_raw,
            aggregate_enhanced: stats.aggregate_enhanced,
            pvalue_enhanced: stats.pvalue_enhanced,
            key_player_raw: row.key_player_raw.clone(),
            key_player_enhanced: row.key_player_enhanced.clone(),
        });
        if *source == common.variance {
            key_player.push(row);
        }
    }

    let mut table = sample_line(&eval.info);
    table.push_str("\np-values\n");
    let mut header = strings(["mu0"]);
    for stat in ["raw", "enhanced"] {
        for source in family {
            header.push(format!("{stat}/{source}"));
        }
    }
    let rows: Vec<Vec<String>> = grid
        .chunks(family.len())
        .map(|chunk| {
            let mut row = vec![format!("{:.2}", chunk[0].mu0)];
            row.extend(chunk.iter().map(|g| fmt3(g.pvalue_raw)));
            row.extend(chunk.iter().map(|g| fmt3(g.pvalue_enhanced)));
            row
        })
        .collect();
    table.push_str(&render_table(&header, &rows));
    let headline = if common.enhanced { "enhanced" } else { "raw" };
    table.push_str(&format!("\nkey player ({headline} statistic, {} normalizer)\n", common.variance));
    let rows: Vec<Vec<String>> = key_player
        .iter()
        .map(|k| {
            let name = if common.enhanced { &k.key_player_enhanced } else { &k.key_player_raw };
            vec![format!("{:.2}", k.mu0), name.clone(), if k.tie_flag { "tie".into() } else { String::new() }]
        })
        .collect();
    table.push_str(&render_table(&strings(["mu0", "key player", ""]), &rows));

    let report = TestReport { schema: SCHEMA, command: "test", sample: eval.info, headline, grid, key_player };
    emit(
        common,
        &report,
        |w| {
            w.write_record([
                "mu0",
                "variance",
                "m0",
                "aggregate_raw",
                "pvalue_raw",
                "aggregate_enhanced",
                "pvalue_enhanced",
                "key_player_raw",
                "key_player_enhanced",
            ])?;
            for g in &report.grid {
                w.write_record([
                    g.mu0.to_string(),
                    g.variance.to_string(),
                    g.m0.to_string(),
                    g.aggregate_raw.to_string(),
                    g.pvalue_raw.to_string(),
                    g.aggregate_enhanced.to_string(),
                    g.pvalue_enhanced.to_string(),
                    g.key_player_raw.clone(),
                    g.key_player_enhanced.clone(),
                ])?;
            }
            Ok(())
        },
        &table,
    )
}

pub fn cmd_keyplayer(data: &DataArgs, common: &Common, ranking: &RankingArgs) -> Result<(), CliError> {
    let ds = load(data)?;
    let eval = evaluate(&ds, common, &[common.variance])?;
    let rank = rank_by(common, ranking);
    let rows = eval
        .stats
        .iter()
        .map(|(mu0, source, stats)| key_player_row(*mu0, *source, stats, ranking.top_k, rank))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = sample_line(&eval.info);
    table.push_str(&format!("\nranking by the {rank} statistic, {} normalizer\n", common.variance));
    let mut header = strings(["rank"]);
    header.extend(rows.iter().map(|r| format!("mu0 = {:.2}", r.mu0)));
    let depth = rows.iter().map(|r| r.top_k.len()).max().unwrap_or(0);
    let body: Vec<Vec<String>> = (0..depth)
        .map(|k| {
            let mut line = vec![(k + 1).to_string()];
            line.extend(rows.iter().map(|r| r.top_k.get(k).map_or_else(String::new, |p| p.name.clone())));
            line
        })
        .collect();
    table.push_str(&render_table(&header, &body));

    let report = KeyPlayerReportOut { schema: SCHEMA, command: "keyplayer", sample: eval.info, rank_by: rank, rows };
    emit(
        common,
        &report,
        |w| {
            w.write_record(["mu0", "variance", "rank", "index", "name", "statistic"])?;
            for r in &report.rows {
                for p in &r.top_k {
                    w.write_record([
                        r.mu0.to_string(),
                        r.variance.to_string(),
                        p.rank.to_string(),
                        p.index.to_string(),
                        p.name.clone(),
                        p.statistic.to_string(),
                    ])?;
                }
            }
            Ok(())
        },
        &table,
    )
}

pub fn cmd_dump(data: &DataArgs, out: Option<&Path>) -> Result<(), CliError> {
    let ds = load(data)?;
    for row in &ds.dropped {
        eprintln!("dropped {}: missing {}", row.date, row.missing.join(", "));
    }
    match out {
        Some(path) if path != Path::new("-") => {
            let mut w = BufWriter::new(File::create(path)?);
            ds.write_csv(&mut w)?;
            w.flush()?;
        }
        _ => ds.write_csv(io::stdout().lock())?,
    }
    Ok(())
}
