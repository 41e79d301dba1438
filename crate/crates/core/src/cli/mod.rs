//! Command-line front end: argument parsing, dispatch and output.

mod commands;
mod table;
mod validate;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;

pub use commands::{cmd_asym, cmd_cdf, cmd_density, cmd_mc, cmd_roc};
pub use table::{format_number, Table};
pub use validate::{cmd_validate, CheckResult, ValidationReport};

/// Environment variable naming a directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "LGEV_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::NumericalInstability { .. })
            | CliError::Lib(Error::NoConvergence { .. })
            | CliError::Lib(Error::NotPositiveDefinite { .. }) => EXIT_NUMERICAL,
            CliError::Lib(_) | CliError::Usage(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::ChecksFailed(_) => EXIT_ACCEPTANCE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Inclusive evenly spaced grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid must look like start:stop:count, got {s:?}"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| format!("bad grid start {:?}", parts[0]))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| format!("bad grid stop {:?}", parts[1]))?;
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count {:?}", parts[2]))?;
        if !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(format!("grid bounds must be finite with start <= stop, got {s:?}"));
        }
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        Ok(Grid { start, stop, count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lgev", version, about = "Leading generalized eigenvalue: exact c.d.f., ROC and Monte Carlo")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Write to this file instead of stdout; relative paths resolve under $LGEV_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Leading-eigenvalue c.d.f. on a grid, optionally with a simulated column.
    Cdf(CdfArgs),
    /// Joint density of the ordered nonzero eigenvalues at one point.
    Density(DensityArgs),
    /// ROC profile of the largest-eigenvalue detector.
    Roc(RocArgs),
    /// Asymptotic ROC and its upper bound.
    Asym(AsymArgs),
    /// Simulated leading eigenvalues.
    Mc(McArgs),
    /// Cross-checks between formulas, closed forms and simulation.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct Dims {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: u32,
}

#[derive(Debug, Clone, Copy, Default, Args, Serialize)]
#[group(multiple = false)]
pub struct Snr {
    /// Spike strength / SNR on the linear scale.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Spike strength / SNR in dB (eta = 10^(dB/10)).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

impl Snr {
    pub fn linear(&self) -> Option<f64> {
        self.eta.or(self.snr_db.map(|db| 10f64.powf(db / 10.0)))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[command(flatten)]
    #[serde(flatten)]
    pub snr: Snr,
    /// Points `x` at which `Pr(lambda_max <= x)` is reported (unnormalized scale).
    #[arg(long, default_value = "0:20:201")]
    pub grid: Grid,
    /// Monte Carlo trials for an extra empirical column (0 = none).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[command(flatten)]
    #[serde(flatten)]
    pub snr: Snr,
    /// Comma-separated ascending eigenvalues, exactly `n` of them.
    #[arg(long, value_delimiter = ',', required = true)]
    pub at: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RocArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub snr: Snr,
    /// Use gamma = m.
    #[arg(long, conflicts_with_all = ["eta", "snr_db"])]
    pub gamma_eq_m: bool,
    /// Asymptotic ROC only, at limit ratio `--c`.
    #[arg(long, requires = "c")]
    pub asym: bool,
    #[arg(long)]
    pub c: Option<f64>,
    /// Add the closed-form column (requires p = m).
    #[arg(long)]
    pub closed_form: bool,
    /// Add the asymptotic column with c = gamma/m and report the largest gap.
    #[arg(long)]
    pub with_asym: bool,
    /// Add the asymptotic upper bound column.
    #[arg(long)]
    pub upper_bound: bool,
    /// False-alarm grid `start:stop:count`; defaults to 101 log-spaced levels
    /// in [1e-4, 1-1e-4] (linear 0:1:101 with --asym).
    #[arg(long)]
    pub pf_grid: Option<Grid>,
    /// Monte Carlo trials per hypothesis for an empirical column (0 = none).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AsymArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "0:1:101")]
    pub pf_grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisArg {
    H0,
    H1,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[command(flatten)]
    #[serde(flatten)]
    pub snr: Snr,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Defaults to h1 when the spike strength is positive.
    #[arg(long, value_enum)]
    pub hypothesis: Option<HypothesisArg>,
    /// Report the empirical c.d.f. of `kappa * lambda_hat` on this grid instead of raw draws.
    #[arg(long)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    /// Reduced trial counts and configuration set.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Test hook: perturb one analytic value so that the suite must fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn metadata(cli: &Cli) -> serde_json::Value {
    let seed = match &cli.command {
        Command::Cdf(a) => Some(a.seed),
        Command::Roc(a) => Some(a.seed),
        Command::Mc(a) => Some(a.seed),
        Command::Validate(a) => Some(a.seed),
        Command::Density(_) | Command::Asym(_) => None,
    };
    json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": &cli.command,
        "format": cli.format,
        "seed": seed,
    })
}

fn render(cli: &Cli, table: &Table) -> String {
    match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(metadata(cli)),
    }
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let path = match std::env::var_os(OUTPUT_DIR_ENV) {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.clone(),
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let table = match &cli.command {
        Command::Cdf(a) => cmd_cdf(a)?,
        Command::Density(a) => cmd_density(a)?,
        Command::Roc(a) => cmd_roc(a)?,
        Command::Asym(a) => cmd_asym(a)?,
        Command::Mc(a) => cmd_mc(a)?,
        Command::Validate(a) => {
            let report = cmd_validate(a);
            let text = match cli.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(metadata(cli)),
            };
            emit(cli, &text)?;
            if !report.passed() {
                return Err(CliError::ChecksFailed(format!("{} of {} checks failed", report.failures(), report.len())));
            }
            return Ok(());
        }
    };
    emit(cli, &render(cli, &table))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_VALIDATION;
        }
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
