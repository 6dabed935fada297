mod data_cmd;
mod error;
mod manifest;
mod output;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use splitmse::config::validate_mu0;
use splitmse::data::Month;
use splitmse::{RankBy, VarianceSource};

use crate::error::CliError;

const DEFAULT_MU0: [f64; 4] = [0.30, 0.35, 0.40, 0.45];

#[derive(Parser, Debug)]
#[command(name = "splitmse", version, about = "Sample-split out-of-sample predictability tests with many predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Aggregate tests on a FRED-MD panel: p-value grid and key player.
    Test {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ranking: RankingArgs,
    },
    /// Key-player screening on a FRED-MD panel: top-k ranking per split fraction.
    Keyplayer {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ranking: RankingArgs,
    },
    /// Write the transformed, aligned sample as CSV (date, target, predictors).
    DumpDataset {
        #[command(flatten)]
        data: DataArgs,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo size experiment from a manifest.
    SimulateSize(SimulateArgs),
    /// Monte Carlo power experiment from a manifest.
    SimulatePower(SimulateArgs),
    /// Monte Carlo key-player detection experiment from a manifest.
    SimulateKeyplayer(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// FRED-MD CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Target series.
    #[arg(long, default_value = "INDPRO")]
    target: String,
    /// Comma-separated predictor names, or `all` for every series but the target.
    #[arg(long, value_delimiter = ',', required_unless_present = "predictors_file")]
    predictors: Vec<String>,
    /// File listing predictor names, separated by commas or newlines.
    #[arg(long, conflicts_with = "predictors")]
    predictors_file: Option<PathBuf>,
    /// First target month (YYYY-MM).
    #[arg(long)]
    start: Option<Month>,
    /// Last target month (YYYY-MM).
    #[arg(long)]
    end: Option<Month>,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Split fraction; repeat or comma-separate [default: 0.30,0.35,0.40,0.45].
    #[arg(long = "mu0", value_delimiter = ',')]
    mu0: Vec<f64>,
    /// Share of the sample used before the first forecast.
    #[arg(long, default_value_t = 0.25)]
    pi0: f64,
    /// Long-run variance normalizer: null, alt, nw-null or nw-alt.
    #[arg(long, default_value = "alt")]
    variance: VarianceSource,
    /// Report the power-enhanced statistic as the headline.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    enhanced: bool,
    /// Newey-West bandwidth [default: floor(0.75 * N^(1/3))].
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Master seed for simulations.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Machine-readable output path (`-` for standard output instead of the table).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads [default: available cores].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct RankingArgs {
    /// Length of the predictor ranking.
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Statistic that orders the ranking [default: enhanced, or raw with --enhanced false].
    #[arg(long)]
    rank_by: Option<RankBy>,
}

#[derive(Args, Debug, Clone)]
struct SimulateArgs {
    /// TOML manifest describing the experiment.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    /// Explicit split fractions; `None` means the command default.
    pub mu0: Option<Vec<f64>>,
    pub pi0: f64,
    pub variance: VarianceSource,
    pub enhanced: bool,
    pub bandwidth: Option<usize>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Common {
    pub fn mu0_or(&self, fallback: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let list = match (&self.mu0, fallback) {
            (Some(v), _) => v.clone(),
            (None, Some(v)) => v.to_vec(),
            (None, None) => DEFAULT_MU0.to_vec(),
        };
        check_mu0(&list)?;
        Ok(list)
    }
}

fn check_mu0(list: &[f64]) -> Result<(), CliError> {
    for &mu0 in list {
        validate_mu0(mu0).map_err(|e| CliError::Usage(format!("--mu0: {e}")))?;
    }
    Ok(())
}

fn validate_common(args: CommonArgs) -> Result<Common, CliError> {
    let mu0 = if args.mu0.is_empty() { None } else { Some(args.mu0) };
    if let Some(list) = &mu0 {
        check_mu0(list)?;
    }
    if !(args.pi0 > 0.0 && args.pi0 < 1.0) {
        return Err(CliError::Usage(format!("--pi0 = {} must lie strictly inside (0, 1)", args.pi0)));
    }
    if args.reps == Some(0) {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    Ok(Common {
        mu0,
        pi0: args.pi0,
        variance: args.variance,
        enhanced: args.enhanced,
        bandwidth: args.bandwidth,
        seed: args.seed,
        reps: args.reps,
        out: args.out,
        format: args.format,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Test { data, common, ranking } => {
            let common = validate_common(common)?;
            data_cmd::cmd_test(&data, &common, &ranking)
        }
        Command::Keyplayer { data, common, ranking } => {
            let common = validate_common(common)?;
            data_cmd::cmd_keyplayer(&data, &common, &ranking)
        }
        Command::DumpDataset { data, out } => data_cmd::cmd_dump(&data, out.as_deref()),
        Command::SimulateSize(args) => {
            let common = validate_common(args.common)?;
            simulate::cmd_simulate(simulate::Kind::Size, &args.manifest, &common)
        }
        Command::SimulatePower(args) => {
            let common = validate_common(args.common)?;
            simulate::cmd_simulate(simulate::Kind::Power, &args.manifest, &common)
        }
        Command::SimulateKeyplayer(args) => {
            let common = validate_common(args.common)?;
            simulate::cmd_simulate(simulate::Kind::KeyPlayer, &args.manifest, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
