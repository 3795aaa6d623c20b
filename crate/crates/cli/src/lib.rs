//! `qosc`: simulate q-deformed coherent-state dynamics, analyze the
//! resulting series and map dynamical regimes over the (q, alpha) plane.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::AppError;

/// Environment variable that replaces the default output directory.
pub const OUT_DIR_ENV: &str = "QOSC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "qosc-out";

#[derive(Debug, Parser)]
#[command(name = "qosc", version, about = "q-deformed oscillator dynamics and regime analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample <X>(t) and <P>(t) and write them as CSV.
    Simulate(SimulateArgs),
    /// Run time-series analyses on a `t,<name>` CSV.
    Analyze(AnalyzeArgs),
    /// Classify the regime on a (q, alpha) grid.
    Sweep(SweepArgs),
    /// Compare the closed-form expectation with explicit Fock-space evolution.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub q: f64,
    /// Real part of the coherent amplitude.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_im: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 15_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    /// Relative tail weight at which the Fock expansion is truncated.
    #[arg(long, default_value_t = qosc_core::qcore::DEFAULT_TRUNC_TOL)]
    pub trunc_tol: f64,
    #[arg(long, default_value_t = qosc_core::qcore::DEFAULT_MAX_TERMS)]
    pub max_terms: usize,
    /// Output directory [default: $QOSC_OUT_DIR or qosc-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Series CSV with a `t,<name>` header.
    pub input: PathBuf,
    #[arg(long)]
    pub spectrum: bool,
    #[arg(long)]
    pub recurrence: bool,
    #[arg(long)]
    pub lyapunov: bool,
    #[arg(long)]
    pub returns: bool,
    #[arg(long)]
    pub regime: bool,
    /// Embedding dimension [default: false nearest neighbours].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Embedding delay in samples [default: first mutual-information minimum].
    #[arg(long)]
    pub delay: Option<usize>,
    /// Recurrence threshold as a fraction of the largest pairwise distance.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Leading samples used for the recurrence matrix.
    #[arg(long, default_value_t = 3000)]
    pub rqa_points: usize,
    /// Steps each Rosenstein neighbour pair is followed.
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    /// First curve index of a manual Rosenstein fit.
    #[arg(long, requires = "fit_end")]
    pub fit_start: Option<usize>,
    /// Last curve index (inclusive) of a manual Rosenstein fit.
    #[arg(long, requires = "fit_start")]
    pub fit_end: Option<usize>,
    /// Width of the return-time cell.
    #[arg(long, default_value_t = 1e-3)]
    pub cell_size: f64,
    #[arg(long, default_value_t = qosc_core::regime::DEFAULT_LAMBDA_THRESHOLD)]
    pub lambda_threshold: f64,
    /// Output directory [default: $QOSC_OUT_DIR/analysis or qosc-out/analysis].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',', conflicts_with = "q_range")]
    pub q: Vec<f64>,
    /// Inclusive range `start:end:step`.
    #[arg(long)]
    pub q_range: Option<String>,
    /// Comma-separated real coherent amplitudes.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 15_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = qosc_core::regime::DEFAULT_LAMBDA_THRESHOLD)]
    pub lambda_threshold: f64,
    /// Stop after computing this many new points; rerun to continue.
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Output directory [default: $QOSC_OUT_DIR or qosc-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_im: f64,
    /// Fock-space dimension [default: smallest sufficient].
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
}

/// `--out`, else the environment override, else the default, optionally
/// with a command-specific subdirectory for the fallbacks.
pub fn resolve_out(out: Option<PathBuf>, sub: Option<&str>) -> PathBuf {
    if let Some(dir) = out {
        return dir;
    }
    let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    match sub {
        Some(s) => base.join(s),
        None => base,
    }
}

/// Execute a parsed command line. Progress and reports go to stdout.
pub fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Analyze(a) => commands::analyze::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::OracleCheck(a) => commands::oracle::run(a),
    }
}
