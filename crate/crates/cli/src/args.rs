use std::path::PathBuf;
use std::str::FromStr;

use beast_core::beast::{Lambda, Method, SubsampleMode, CACHE_ENV};
use beast_core::scenarios::ScenarioKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "beast",
    version,
    about = "Binary-expansion tests of independence",
    args_override_self = true
)]
pub struct Cli {
    /// File of `key = value` lines used as defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for Monte Carlo loops. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test independence between two groups of columns of a table.
    Test(TestArgs),
    /// Estimate power against a named alternative over a grid of noise levels.
    Power(PowerArgs),
    /// Simulate a null distribution into the cache.
    Null(NullArgs),
    /// Tabulate the binary-expansion approximation of a characteristic function.
    Beauty(BeautyArgs),
    /// Print cell counts and symmetry statistics of selected columns.
    Expand(ExpandArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Rerank,
    Fixed,
}

impl From<ModeArg> for SubsampleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rerank => SubsampleMode::Rerank,
            ModeArg::Fixed => SubsampleMode::FixedCells,
        }
    }
}

/// `auto` or a nonnegative number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaArg(pub Lambda);

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaArg(Lambda::Auto));
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(LambdaArg(Lambda::Fixed(v))),
            _ => Err(format!("expected 'auto' or a number >= 0, got '{s}'")),
        }
    }
}

/// Parameters shared by every command that evaluates a statistic.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Expansion depth.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub depth: u8,

    /// Soft threshold: `auto` for sqrt(p D ln2 / (8 n)), or a value.
    #[arg(long, default_value = "auto")]
    pub lambda: LambdaArg,

    /// Number of subsamples.
    #[arg(long, default_value_t = 128)]
    pub m: usize,

    /// Subsample size.
    #[arg(long, default_value_t = 24)]
    pub r: usize,

    /// Monte Carlo draws in the null distribution.
    #[arg(long, default_value_t = 2000)]
    pub null_sims: usize,

    /// Master seed. A random seed is drawn and logged when absent.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Whether subsamples are re-ranked or keep their full-sample cells.
    #[arg(long, value_enum, default_value = "rerank")]
    pub subsample_mode: ModeArg,

    /// Directory holding cached null distributions.
    #[arg(long, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Delimited text table with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Columns of the first group: header names or 1-based indices,
    /// comma separated, ranges like `1-3` allowed. Default: all but the last.
    #[arg(long)]
    pub x_cols: Option<String>,

    /// Columns of the second group. Default: the last column.
    #[arg(long)]
    pub y_cols: Option<String>,

    /// beast, chi2, maxbet or spearman.
    #[arg(long, default_value = "beast")]
    pub method: Method,

    /// Interactions listed in the report.
    #[arg(long, default_value_t = 5)]
    pub top: usize,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Report file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub scenario: ScenarioKind,

    /// Noise levels in [0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
    pub kappas: Vec<f64>,

    /// Replicates per noise level.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,

    /// Sample size of each replicate.
    #[arg(long, default_value_t = 128)]
    pub n: usize,

    /// Level of every test.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    #[arg(
        long,
        value_delimiter = ',',
        default_value = "beast,oracle,chi2,maxbet"
    )]
    pub methods: Vec<Method>,

    /// Draws used to approximate the oracle weights.
    #[arg(long, default_value_t = 100_000)]
    pub oracle_k: usize,

    /// CSV file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct NullArgs {
    /// Sample size.
    #[arg(long)]
    pub n: usize,

    /// Number of variables in the first group.
    #[arg(long, default_value_t = 1)]
    pub x_dims: usize,

    /// Number of variables in the second group.
    #[arg(long, default_value_t = 1)]
    pub y_dims: usize,

    /// beast, chi2, maxbet or spearman.
    #[arg(long, default_value = "beast")]
    pub method: Method,

    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct BeautyArgs {
    /// Expansion depth.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(1..=12))]
    pub depth: u8,

    /// Dimension of the uniform reference distribution.
    #[arg(long, default_value_t = 1)]
    pub p: usize,

    /// Frequency vectors, comma separated coordinates; repeat for more rows.
    #[arg(long = "t", required = true)]
    pub t: Vec<String>,

    /// Use the empirical copula of these data instead of the uniform law.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Columns of `--input`; default all.
    #[arg(long)]
    pub cols: Option<String>,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Seed for tie-breaking in the rank transform.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Columns to expand; default all.
    #[arg(long)]
    pub cols: Option<String>,

    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub depth: u8,

    /// Seed for tie-breaking in the rank transform.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    #[arg(long)]
    pub output: Option<PathBuf>,
}
