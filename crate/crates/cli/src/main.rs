//! `latfkg` — lattice fractional Klein-Gordon toolkit.
//!
//! Subcommands: `coeffs`, `solve`, `symbol-gap`, `converge`, `energy`.
//! Each run reads a JSON config (a few scalar flags can stand in for it on
//! `coeffs` and `symbol-gap`), writes CSV artifacts plus a `manifest.json`
//! with SHA-256 digests of every emitted file into `--out-dir`, and is
//! bit-reproducible for a fixed config and seed.
//!
//! Exit codes: 0 success, 1 a `--assert` check failed, 2 invalid
//! configuration or environment.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "latfkg",
    version,
    about = "lattice fractional Klein-Gordon toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (created if missing); all artifacts land here.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Override the CSV file name of single-file subcommands.
    #[arg(long)]
    out: Option<String>,

    /// Enable numeric assertions; failures exit with status 1.
    #[arg(long = "assert")]
    assert_mode: bool,

    /// Seed for built-in randomized data (overrides the config's `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Fractional exponent in (0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Lattice dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Stencil truncation radius (max ||j||_inf retained).
    #[arg(long)]
    radius: Option<usize>,
    /// Quadrature points per axis (power of two >= 64).
    #[arg(long)]
    quad_points: Option<usize>,
}

#[derive(Debug, Args)]
struct SymbolGapArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Lattice dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Points per axis (even).
    #[arg(long = "N")]
    points: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fractional centered-difference coefficient table.
    Coeffs(CoeffsArgs),
    /// Solve the lattice Cauchy problem and record states and energies.
    Solve(RunArgs),
    /// Tabulate the continuum/lattice symbol gap over the dual grid.
    SymbolGap(SymbolGapArgs),
    /// Lattice-vs-continuum convergence sweep with rate fit.
    Converge(RunArgs),
    /// Energy functional of a stored state.
    Energy(RunArgs),
}

/// Exit-status carrier for the two failure classes the harness distinguishes.
pub enum CliError {
    /// Bad configuration or environment (exit 2); one message per field path.
    Validation(Vec<String>),
    /// A numeric assertion under --assert failed (exit 1).
    Assertion(String),
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(vec![msg.into()])
    }
}

impl From<latfkg::Error> for CliError {
    fn from(e: latfkg::Error) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::invalid(format!("i/o error: {e}"))
    }
}

fn init_thread_pool() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("LATFKG_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            CliError::invalid(format!("LATFKG_THREADS: not a thread count: '{raw}'"))
        })?;
        if threads == 0 {
            return Err(CliError::invalid("LATFKG_THREADS: must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::invalid(format!("LATFKG_THREADS: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_thread_pool().and_then(|()| match cli.command {
        Command::Coeffs(args) => commands::coeffs::run(args),
        Command::Solve(args) => commands::solve::run(args),
        Command::SymbolGap(args) => commands::symbol_gap::run(args),
        Command::Converge(args) => commands::converge::run(args),
        Command::Energy(args) => commands::energy::run(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(errors)) => {
            eprintln!("invalid configuration:");
            for e in errors {
                eprintln!("  - {e}");
            }
            ExitCode::from(2)
        }
    }
}
