//! `bksreg`: spectra, regularized pairings, semiclassical states and the
//! invariant suite from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bksreg", version, about = "Kähler-regularized pairings for the harmonic oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Corrected and uncorrected levels as CSV.
    Spectrum(Args),
    /// Regularized pairing along the configured schedule, as JSON.
    Pair(Args),
    /// Semiclassical state and exact eigenfunction as CSV, plus a JSON summary.
    Semiclassical(Args),
    /// Invariant suite on the configured grids.
    Verify(Args),
}


#[derive(Debug, Clone, clap::Args)]
struct Args {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Level index (for `spectrum`, the highest level when `m_max` is unset).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Spectrum(a) | Command::Pair(a) | Command::Semiclassical(a) | Command::Verify(a)) = &cli.command;
    let overrides = Overrides { m: a.m, hbar: a.hbar, out: a.out.clone(), verbose: a.verbose };
    let cfg = RunConfig::load(&a.config, overrides)?;
    match cli.command {
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg),
        Command::Pair(_) => commands::cmd_pair(&cfg),
        Command::Semiclassical(_) => commands::cmd_semiclassical(&cfg),
        Command::Verify(_) => commands::cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
