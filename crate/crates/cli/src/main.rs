//! `cslab`: run experiments on finite-gap data and the verification suite.
//!
//! Exit codes: 0 success, 1 configuration error, 2 blow-up abort, 3 verification failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cslab_core::verify::{VerifyOptions, DEFAULT_SEED};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cslab", version, about = "Calogero-Sutherland DNLS experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a datum with one or all engines and write CSV trajectories.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Blow-up report for a resonant datum (JSON).
    Blowup {
        #[arg(long)]
        config: PathBuf,
    },
    /// Spectral dichotomy report for a datum, or a random sweep (JSON).
    Stability {
        #[arg(long, required_unless_present = "sweep")]
        config: Option<PathBuf>,
        /// Assess this many random data instead of the configured datum.
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        truncation: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Coarser scans and time grids, and no refinement diagnostics.
        #[arg(long)]
        fast: bool,
        /// Force every engine truncation.
        #[arg(long)]
        truncation: Option<usize>,
        /// Force the oracle time step.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CSLAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => commands::simulate(&ExperimentConfig::load(&config)?),
        Command::Blowup { config } => commands::blowup(&ExperimentConfig::load(&config)?),
        Command::Stability {
            config,
            sweep,
            seed,
            truncation,
            report,
        } => match (sweep, config) {
            (Some(count), _) => commands::stability_sweep(count, seed, truncation, report.as_deref()),
            (None, Some(path)) => {
                let mut cfg = ExperimentConfig::load(&path)?;
                if report.is_some() {
                    cfg.output.report = report;
                }
                commands::stability(&cfg)
            }
            (None, None) => unreachable!("clap requires --config without --sweep"),
        },
        Command::Verify {
            fast,
            truncation,
            dt,
            seed,
            report,
        } => {
            if truncation.is_some_and(|n| n < 2) {
                return Err(CliError::Config("truncation must be at least 2".into()));
            }
            if dt.is_some_and(|dt| dt.is_nan() || dt <= 0.0) {
                return Err(CliError::Config("dt must be positive".into()));
            }
            commands::verify(
                &VerifyOptions {
                    fast,
                    truncation,
                    dt,
                    seed,
                },
                report.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cslab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
