//! Command-line driver: profile files, verification commands, sweeps and
//! report emission.
//!
//! Exit codes are a stable contract: 0 success, 1 check or bound failure,
//! 2 resource budget, 3 input error.

pub mod commands;
pub mod output;
pub mod profile;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use definetti_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_090_903;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("check failed: {0}")]
    Failure(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Budget { .. } => CliError::Budget(e.to_string()),
            CoreError::Io(_) => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "definetti",
    version,
    about = "Finite de Finetti checks for coherent-power states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; 0 uses the default pool, 1 forces the sequential path.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Λ identity, vacuum and commutation residuals on the dense oracle.
    IdentityCheck(IdentityArgs),
    /// One bound verification for a profile.
    Approx(ApproxArgs),
    /// Bound verification over an (n, k) table with slope fits.
    Sweep(SweepArgs),
    /// Write a two-peak Gaussian superposition profile.
    GaussianProfile(GaussianArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Levels per mode.
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    /// Coherent amplitude "re,im"; repeatable.
    #[arg(long = "alpha", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alphas: Vec<Complex64>,
    /// Extra amplitudes drawn uniformly from the unit disk.
    #[arg(long, default_value_t = 4)]
    pub random_alphas: usize,
    #[arg(long, default_value_t = 0.25)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 7.0)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Profile JSON file.
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub w_max: Option<usize>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub target_tail: Option<f64>,
    /// Slack added to the conservative bound.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_delimiter = ',', required = true, num_args = 0..)]
    pub n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k_list: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub center1: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub center2: Complex64,
    #[arg(long)]
    pub sigma: f64,
    /// Samples per peak.
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub target_tail: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses "re,im" or a bare real.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| format!("bad number '{t}': {e}"))
    };
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected 're,im', got '{s}'")),
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(format!("non-finite amplitude '{s}'"));
    }
    Ok(z)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match commands::execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
