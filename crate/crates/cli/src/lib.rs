//! Command-line front end: estimation, simulation, ingestion, benchmarks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{CommonArgs, Settings};
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "ivcov", version, about = "Sparse covariance estimation from interval-valued data")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a covariance matrix from an interval CSV pair.
    Estimate(commands::estimate::EstimateArgs),
    /// Generate synthetic interval data.
    #[command(subcommand)]
    Simulate(commands::simulate::SimulateCommand),
    /// Convert raw market data into an interval CSV pair.
    #[command(subcommand)]
    Ingest(commands::ingest::IngestCommand),
    /// Run a benchmark grid: table1, table2, table3, table5 or custom.
    Bench(bench::BenchArgs),
    /// Eigenvalue and diagonal plot data for a matrix CSV.
    Spectrum(commands::spectrum::SpectrumArgs),
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("ivcov: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli.common)?;
    match &cli.command {
        Command::Estimate(a) => commands::estimate::run(a, &settings),
        Command::Simulate(c) => commands::simulate::run(c, &settings),
        Command::Ingest(c) => commands::ingest::run(c, &settings),
        Command::Bench(a) => bench::run(a, &settings),
        Command::Spectrum(a) => commands::spectrum::run(a, &settings),
    }
}

/// Output location helper shared by commands: `<out>/<file>`.
pub(crate) fn out_path(settings: &Settings, file: &str) -> PathBuf {
    settings.out.join(file)
}
