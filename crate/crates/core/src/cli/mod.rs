//! `ltvobs <counterexample|pe-check|gramian|simulate> [options]`
//!
//! Exit codes: 0 success, 1 analytic failure (thresholds not met, observer
//! collapse), 2 numeric or I/O failure, 64 usage, 65 parse, 66 missing input.

mod commands;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use output::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    AnalyticFailure = 1,
    NumericFailure = 2,
    Usage = 64,
    Parse = 65,
    MissingInput = 66,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Usage, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Counterexample,
    PeCheck,
    Gramian,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Counterexample => "counterexample",
            Self::PeCheck => "pe-check",
            Self::Gramian => "gramian",
            Self::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ltvobs", version, about = "Uniform observability toolkit for LTV systems")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    pub command: Command,

    /// Scenario JSON, or `builtin:counterexample` for `gramian`.
    #[arg(long)]
    pub config: Option<String>,

    /// Observer settings JSON for `simulate`.
    #[arg(long)]
    pub observer: Option<PathBuf>,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Window length(s); repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,

    /// Window start.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,

    /// Simpson nodes per window (odd).
    #[arg(long, default_value_t = crate::ltv::DEFAULT_NODES)]
    pub nodes: usize,

    /// Use the stacked chain matrix `M` instead of `C`.
    #[arg(long)]
    pub use_m: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for window scans.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Window starts as `START:STEP:COUNT`.
    #[arg(long)]
    pub grid: Option<String>,
}

/// Outcome of a completed subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: ExitCode,
    pub summary: String,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::Usage.code()
            } else {
                ExitCode::Success.code()
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            println!("{}", out.summary);
            out.code.code()
        }
        Err(e) => {
            eprintln!("ltvobs {}: {}", cli.command.name(), e.message);
            e.code.code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    match cli.command {
        Command::Counterexample => commands::counterexample(cli),
        Command::PeCheck => commands::pe_check_cmd(cli),
        Command::Gramian => commands::gramian_cmd(cli),
        Command::Simulate => commands::simulate(cli),
    }
}

pub(crate) fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::usage(format!("--grid expects START:STEP:COUNT, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let step: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !(step >= 0.0) {
        return Err(bad());
    }
    Ok((0..count).map(|k| start + step * k as f64).collect())
}
