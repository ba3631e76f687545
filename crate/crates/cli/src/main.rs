//! `lossphase` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
//! 3 resource guard, 4 numeric divergence.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Format;

#[derive(Parser, Debug)]
#[command(name = "lossphase", version, about = "Loss-resistant adaptive phase estimation")]
struct Cli {
    /// JSON file with parameters; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact path (stdout when absent)
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads, 0 = all cores
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loss-resistant state, its three-port network and a forward-simulation check
    StatePrep(commands::StatePrepArgs),
    /// Fourier coefficients of every detection probability
    Probs(commands::ProbsArgs),
    /// Fisher information across a χ grid
    FisherScan(commands::FisherScanArgs),
    /// Average sharpness and Holevo variance of one sequence
    Evaluate(commands::EvaluateArgs),
    /// Best sequence for a photon budget
    Optimize(commands::OptimizeArgs),
}

/// A bad flag, config value or parameter combination.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use lossphase::Error;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::BranchGuard { .. } | Error::DimensionGuard { .. }) => 3,
        Some(Error::FisherDivergence { .. }) => 4,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
