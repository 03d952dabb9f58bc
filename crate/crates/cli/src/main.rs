//! Command-line front end for the cobeam beamforming toolkit.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

mod cmd;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Parser)]
#[command(
    name = "cobeam",
    version,
    about = "Convolutional and sparse-array receive beamforming for ultrasound B-mode imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or optimize a sparse array design (SCOBA / SCOBAR).
    Design(cmd::design::DesignArgs),
    /// Far-field beam patterns and lobe metrics for the configured methods.
    Beampattern(cmd::beampattern::BeampatternArgs),
    /// Generate synthetic channel data from the config's phantom.
    Simulate(cmd::simulate::SimulateArgs),
    /// Beamform channel data into B-mode images.
    Beamform(cmd::beamform::BeamformArgs),
    /// Quality metrics (contrast ratio, FWHM) on a written image.
    Metrics(cmd::metrics::MetricsArgs),
}

fn classify(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if let Some(core) = err.downcast_ref::<cobeam::Error>() {
        return match core {
            cobeam::Error::Io(_) | cobeam::Error::Format(_) => 4,
            _ => 3,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 4;
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    3
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(args) => cmd::design::run(args),
        Command::Beampattern(args) => cmd::beampattern::run(args, argv),
        Command::Simulate(args) => cmd::simulate::run(args, argv),
        Command::Beamform(args) => cmd::beamform::run(args, argv),
        Command::Metrics(args) => cmd::metrics::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
