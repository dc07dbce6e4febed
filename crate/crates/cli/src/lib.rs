//! Command-line front end: fit regression and matrix models from CSV files,
//! run simulation suites and print risk-bound decompositions.

pub mod commands;
pub mod csvio;
pub mod error;
pub mod output;
pub mod scenario;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tunefree", version, about = "Tuning-free sparse regression and matrix denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the sparse regression estimator to a design and response.
    Regress(commands::regress::RegressArgs),
    /// Estimate a low-rank matrix from a noisy observation.
    Denoise(commands::denoise::DenoiseArgs),
    /// Run simulation scenarios comparing with cross-validated Lasso.
    Simulate(commands::simulate::SimulateArgs),
    /// Evaluate the risk-bound rate and its additive terms.
    Bounds(commands::bounds::BoundsArgs),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Regress(a) => commands::regress::execute(a),
        Command::Denoise(a) => commands::denoise::execute(a),
        Command::Simulate(a) => commands::simulate::execute(a),
        Command::Bounds(a) => commands::bounds::execute(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Usage errors exit with 2, like every other input error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
