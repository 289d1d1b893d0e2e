use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcorr::garch::{ModelKind, DEFAULT_BURN_IN};

#[derive(Debug, Parser)]
#[command(
    name = "qcorr",
    version,
    about = "Quantile correlation analysis of return series"
)]
pub struct Cli {
    /// Worker threads for per-day and per-series work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resample a tick CSV onto the one-second grid, one file per accepted day.
    Ingest(IngestArgs),
    /// Build the equally weighted index of every date in a directory of days.
    Index(IndexArgs),
    /// Quantile correlation curves for one or more quantile pairs.
    Qcf(QcfArgs),
    /// Probability-probability grids at fixed lags.
    Ppgrid(PpgridArgs),
    /// Asymmetry table from (0.05, 0.95) curves.
    Asym(AsymArgs),
    /// Simulate GARCH, EGARCH or GJR-GARCH returns.
    Simulate(SimulateArgs),
    /// Fit GJR-GARCH(1,1) to each input series and average the parameters.
    Fit(FitArgs),
    /// Simulate from fitted parameters (an averaged set or one set per day).
    Resim(ResimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tick CSV: date,time_seconds,instrument,price[,regular].
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub session_open: i64,
    #[arg(long, default_value_t = 23_400)]
    pub session_close: i64,
    /// Seconds dropped at each end of the session.
    #[arg(long, default_value_t = 600)]
    pub trim: i64,
    /// Days with fewer distinct traded seconds are rejected.
    #[arg(long, default_value_t = 800)]
    pub min_traded: usize,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Directory of `<date>_<instrument>.csv` price files.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// How price files become returns. Ignored for return series.
#[derive(Debug, Args)]
pub struct ReturnArgs {
    /// Return horizon in seconds.
    #[arg(long, default_value_t = 60)]
    pub horizon: usize,
    /// Seconds between return start points (default: 1 for correlation
    /// commands, the horizon for fitting).
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QcfArgs {
    /// Series file, or a directory whose CSV/JSON files are per-day series.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Lower-level probability of a pair; repeat together with --beta.
    #[arg(long)]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub beta: Vec<f64>,
    /// Largest lag, in return steps.
    #[arg(long)]
    pub max_lag: usize,
    #[command(flatten)]
    pub returns: ReturnArgs,
    /// Write one curve per input series instead of their average.
    #[arg(long)]
    pub no_average: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PpgridArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated levels (default 0.05, 0.10, ..., 0.95).
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// Fixed lag in return steps; repeatable. Defaults to 2 and 10 for
    /// return series and 120, 600, 1200, 3600 seconds for price files.
    #[arg(long, allow_negative_numbers = true)]
    pub lag: Vec<i64>,
    #[command(flatten)]
    pub returns: ReturnArgs,
    #[arg(long)]
    pub no_average: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    /// Curve files written by `qcf` (CSV or JSON); repeatable.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Quantile pair assumed for CSV curves, which do not record it.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    pub beta: f64,
    /// Use only lags up to this bound (default: the whole curve).
    #[arg(long)]
    pub max_lag: Option<u64>,
    /// Dataset column (default: file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, default_value = "")]
    pub year: String,
    /// Directory for `asymmetry.txt` and `asymmetry.csv`; the table goes to
    /// stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "gjr")]
    pub model: ModelKind,
    /// Parameters default to the demonstration set of the chosen model.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Base seed; QCORR_SEED overrides it when set.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub n_series: usize,
    #[arg(long)]
    pub length: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub returns: ReturnArgs,
    /// Leave fits with alpha1 + beta1 + gamma1/2 above this out of the average.
    #[arg(long)]
    pub max_persistence: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ResimArgs {
    /// Parameter JSON (averaged protocol) or fit CSV/JSON (per-day protocol).
    #[arg(long)]
    pub input: PathBuf,
    /// Series for the averaged protocol; per-day runs simulate one per fit.
    #[arg(long, default_value_t = 1)]
    pub n_series: usize,
    #[arg(long)]
    pub length: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
