//! Command-line front end.
//!
//! ```text
//! kalpha simulate --alpha 1.5 --horizon 100 --seed 42 --out p.jsonl [--small] [--paths N --workers W]
//! kalpha diagnose --in p.jsonl --envelope exp:c=1 [--burn-in 10] [--growth-eta 0.5] [--json r.json] [--plot-data g.csv]
//! kalpha diagnose --alpha 1.5 --moment-scan eta=0.25,caps=10,100,1000
//! kalpha diagnose --alpha 1.0 --pruitt etas=0.05,0.5,rs=10,100,1000
//! kalpha classify --alpha 1.5 --betas 2,3
//! kalpha pair --in p.jsonl --phi bump:center=5,width=2 [--json out.json]
//! ```
//!
//! Exit codes: 0 success, 2 argument or domain error, 3 I/O error,
//! 4 internal inconsistency.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::measure::{EnvelopeError, MeasureError};
use crate::paths::PathError;
use crate::spaces::SpacesError;

pub use commands::{parse_key_lists, KeyLists};
pub use manifest::{RunManifest, REPORT_FORMAT_VERSION, TOOL_VERSION};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CONSISTENCY: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Consistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Domain(_) => EXIT_USAGE,
            Self::Io(_) => EXIT_IO,
            Self::Consistency(_) => EXIT_CONSISTENCY,
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Inconsistent { .. } | MeasureError::Quadrature(_) | MeasureError::UnexpectedDivergence(_) => {
                Self::Consistency(e.to_string())
            }
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<EnvelopeError> for CliError {
    fn from(e: EnvelopeError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Measure(m) => m.into(),
            PathError::Io(_) | PathError::Format { .. } => Self::Io(e.to_string()),
            PathError::Pool(_) => Self::Consistency(e.to_string()),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Measure(m) => m.into(),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<SpacesError> for CliError {
    fn from(e: SpacesError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kalpha",
    version,
    about = "Simulate K_alpha Levy paths and check their growth and support numerically"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and write them as JSON Lines.
    Simulate(SimulateArgs),
    /// Envelope exceedances of simulated paths, or the moment / Pruitt scans.
    Diagnose(DiagnoseArgs),
    /// Support classification (S', K', K'_beta) for a given alpha.
    Classify(ClassifyArgs),
    /// Pair the derivative of a simulated path with a test function.
    Pair(PairArgs),
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, env = "KALPHA_SEED")]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of independent paths (indices 0..N).
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Worker threads; the output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Also simulate the small-jump component.
    #[arg(long)]
    pub small: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Grid step of the small-jump component [default: horizon / 1024].
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Small-jump output file [default: OUT.small.jsonl].
    #[arg(long)]
    pub small_out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct DiagnoseArgs {
    /// Path files written by `simulate`.
    #[arg(long = "in", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Envelope descriptor: pow:beta=B, exp:c=C or powexp:c=C,beta=B.
    #[arg(long)]
    pub envelope: Option<String>,
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_BURN_IN)]
    pub burn_in: f64,
    /// Also report max_paths t^(-1/eta) L*(t) at dyadic t.
    #[arg(long)]
    pub growth_eta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `eta=E,caps=C1,C2,...`
    #[arg(long)]
    pub moment_scan: Option<String>,
    /// `etas=E1,E2,...,rs=R1,R2,...`
    #[arg(long)]
    pub pruitt: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write a CSV table for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub betas: Vec<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct PairArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Test function: gaussian:center=C,scale=S, bump:center=C,width=W or expdecay:rate=R,degree=D.
    #[arg(long)]
    pub phi: String,
    /// Which path of a multi-path file to pair.
    #[arg(long, default_value_t = 0)]
    pub path_index: u64,
    /// Small-jump file to include by trapezoidal quadrature.
    #[arg(long)]
    pub small_in: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Diagnose(a) => commands::diagnose(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Pair(a) => commands::pair(&a),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
