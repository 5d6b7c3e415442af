use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhe_cli::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "mhe", version, about = "Hyperspherical energy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Log progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(clap::Args)]
struct Io {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports and CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the energy of a point configuration.
    Energy(Io),
    /// Minimize the energy of a configuration on the sphere.
    Minimize(Io),
    /// Compare MHE, half-space MHE and orthonormal regularization.
    Compare(Io),
    /// Minimal-energy growth and uniformity checks.
    Theory(Io),
    /// Train a classifier with MHE regularization.
    Train(Io),
}

fn emit<T: Serialize>(out: &Path, name: &str, report: &T) -> Result<()> {
    let path = write_outputs(out, name, report)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Energy(io) => {
            let report = run_energy(load_config(&io.config)?)?;
            emit(&io.out, "energy", &report)?;
            println!("{}", serde_json::to_string_pretty(&report.energy).expect("serializes"));
        }
        Command::Minimize(io) => {
            let report = run_minimize(load_config(&io.config)?)?;
            emit(&io.out, "trajectory", &report)?;
            write_points_csv(&io.out.join("final_points.csv"), report.trajectory.final_points())?;
        }
        Command::Compare(io) => {
            let report = run_compare(load_config(&io.config)?)?;
            emit(&io.out, "compare", &report)?;
        }
        Command::Theory(io) => {
            let report = run_theory(load_config(&io.config)?)?;
            emit(&io.out, "theory", &report)?;
        }
        Command::Train(io) => {
            let report = run_train(load_config(&io.config)?)?;
            emit(&io.out, "train", &report)?;
            write_features(&io.out.join("features.csv"), &report.report)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
