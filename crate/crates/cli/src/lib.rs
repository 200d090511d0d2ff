//! The `randstream` command line: extraction over files or standard input,
//! efficiency tables, exact uniformity checks and seeded benchmarks.

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
mod extract;
pub mod input;

pub use extract::{run_extract, Stats};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input symbol {found:?} at byte offset {offset}")]
    BadSymbol { offset: u64, found: String },
    #[error("input ended after {consumed} symbols with {produced} of {requested} bits")]
    Exhausted {
        consumed: u64,
        produced: usize,
        requested: usize,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadSymbol { .. } => 2,
            CliError::Exhausted { .. } => 3,
            CliError::Config(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub(crate) fn config(msg: impl fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

/// A depth limit, or `unlimited`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Depth(pub Option<u32>);

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unlimited" | "none" | "inf" => Ok(Depth(None)),
            _ => s
                .parse()
                .map(|d| Depth(Some(d)))
                .map_err(|_| format!("expected a non-negative integer or `unlimited`, got {s:?}")),
        }
    }
}

impl Default for Depth {
    fn default() -> Self {
        Depth(Some(15))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Coin,
    Dice,
    Markov,
    Vonneumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Text,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Ascii,
    Packed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMetric {
    /// Expected tosses per output bit.
    Tosses,
    /// Expected node deliveries per toss.
    Time,
    /// Bits per toss relative to the entropy bound.
    Efficiency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "randstream", version, about = "Unbiased random bits from biased sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract bits from a symbol stream.
    Extract(ExtractArgs),
    /// Print expected efficiency or processing cost tables.
    Analyze(AnalyzeArgs),
    /// Check exact uniformity of the first output bits by enumeration.
    Verify(VerifyArgs),
    /// Run seeded extraction simulations on a pseudorandom biased coin.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_enum, default_value = "coin")]
    pub mode: Mode,
    /// Maximum status-tree depth, or `unlimited`.
    #[arg(long, default_value = "15")]
    pub depth: Depth,
    /// Alphabet size for dice and Markov modes. Inferred from a digit file
    /// when omitted.
    #[arg(long)]
    pub m: Option<u32>,
    /// Stop after this many bits.
    #[arg(long)]
    pub bits: Option<usize>,
    /// Input file; standard input when omitted or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub input_format: InputFormat,
    #[arg(long, value_enum, default_value = "ascii")]
    pub output_format: OutputFormat,
    /// Write run statistics as JSON to standard error.
    #[arg(long)]
    pub stats: bool,
    /// Write run statistics as JSON to this file.
    #[arg(long)]
    pub stats_file: Option<PathBuf>,
    /// Markov mode: comma-separated state labels in face order, e.g. `2,0,1`.
    #[arg(long)]
    pub state_order: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum, default_value = "tosses")]
    pub metric: AnalyzeMetric,
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,7,10,15")]
    pub depths: Vec<u32>,
    /// Comma-separated probabilities of heads.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    pub ps: Vec<f64>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "coin")]
    pub mode: Mode,
    /// Coin mode: probability of heads, e.g. `1/3`.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// Dice mode: comma-separated face probabilities.
    #[arg(long)]
    pub dist: Option<String>,
    /// Markov mode: transition matrix, rows separated by `;`, entries by `,`.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Markov mode: initial state.
    #[arg(long, default_value_t = 0)]
    pub start: u32,
    #[arg(long, default_value = "15")]
    pub depth: Depth,
    /// Input length to enumerate (for Markov, path length including the
    /// start state).
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Number of output bits checked.
    #[arg(long, default_value_t = 1)]
    pub bits: usize,
    /// Ignore the enumeration size caps.
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Probability of heads.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, default_value = "15")]
    pub depth: Depth,
    /// Bits to extract per trial.
    #[arg(long, default_value_t = 100_000)]
    pub bits: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Trial `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

/// Runs a parsed command, writing results to `out` and diagnostics to
/// `err`.
pub fn run(cli: Cli, out: &mut impl io::Write, err: &mut impl io::Write) -> Result<bool, CliError> {
    match cli.command {
        Command::Extract(args) => run_extract(&args, out, err).map(|_| true),
        Command::Analyze(args) => commands::analyze(&args, out).map(|_| true),
        Command::Verify(args) => commands::verify(&args, out),
        Command::Bench(args) => commands::bench(&args, out).map(|_| true),
    }
}

/// Parses `args`, runs the command against the process streams and maps the
/// outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    match run(cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("randstream: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
