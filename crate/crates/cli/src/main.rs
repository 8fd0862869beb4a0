//! `nlslab`: run, verify and analyze periodic 1-D cubic Schrödinger
//! experiments with bit-reproducible CSV/JSON outputs.
//!
//! Exit codes: 0 success, 1 runtime/check failure, 2 configuration error,
//! 3 solver abort (field became non-finite).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Schema violation or invalid parameter; exits 2.
    Config(String),
    /// The solver aborted mid-run; exits 3.
    Solver(String),
    /// Anything else (I/O, degenerate analysis input); exits 1.
    Other(String),
}

impl CliError {
    fn report(&self) -> (i32, String) {
        match self {
            CliError::Config(msg) => (2, format!("error: config: {msg}")),
            CliError::Solver(msg) => (3, format!("error: solver: {msg}")),
            CliError::Other(msg) => (1, format!("error: {msg}")),
        }
    }
}

impl From<nlslab_core::Error> for CliError {
    fn from(e: nlslab_core::Error) -> Self {
        use nlslab_core::Error::*;
        match &e {
            NonFiniteField { .. } => CliError::Solver(e.to_string()),
            MemberFailed { index, source } => {
                if matches!(**source, NonFiniteField { .. }) {
                    CliError::Solver(format!("ensemble member {index}: {source}"))
                } else {
                    CliError::Other(e.to_string())
                }
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nlslab",
    about = "Periodic 1-D cubic Schrödinger simulation and verification laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct CommonRunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Force the 2/3-rule dealiasing mask on, overriding the config.
    #[arg(long)]
    pub dealias: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial datum and write the diagnostics CSV.
    Run {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Also write a field snapshot CSV at every recorded time.
        #[arg(long)]
        dump_fields: bool,
    },
    /// Run the full verification suite; exit 0 only if every check passes.
    Verify,
    /// Local-smoothing ensemble: per-member CSV and the empirical constant.
    Smoothing {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Path to the JSON ensemble description.
        #[arg(long)]
        ensemble: PathBuf,
        /// Observation point (snapped to the nearest grid node).
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Override the ensemble seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Error-vs-dt study: run at dt, dt/2, ..., dt/2^N and fit the order.
    Convergence {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Number of halvings N.
        #[arg(long)]
        halvings: u32,
    },
    /// Center-of-mass and action diagnostics on one run.
    Variational {
        #[command(flatten)]
        common: CommonRunArgs,
    },
}

/// Worker cap from NLSLAB_THREADS (0 or unset means auto).
fn thread_cap() -> usize {
    std::env::var("NLSLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            common,
            dump_fields,
        } => commands::run(&common, dump_fields),
        Command::Verify => commands::verify(thread_cap()),
        Command::Smoothing {
            common,
            ensemble,
            x0,
            seed,
        } => commands::smoothing(&common, &ensemble, x0, seed, thread_cap()),
        Command::Convergence { common, halvings } => commands::convergence(&common, halvings),
        Command::Variational { common } => commands::variational(&common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let (code, msg) = e.report();
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
