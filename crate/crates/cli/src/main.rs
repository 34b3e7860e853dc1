//! `pedforce`: social-force features, group detection, stochastic rollouts,
//! and displacement/collision metrics for pedestrian trajectory data.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::CommonArgs;

#[derive(Parser, Debug)]
#[command(
    name = "pedforce",
    version,
    about = "Social-force toolkit for pedestrian trajectory prediction",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse trajectory files and report window counts per subset
    Ingest(CommonArgs),
    /// Detect walking groups and emit per-pair verdicts
    Groups(CommonArgs),
    /// Export per-step driving and repulsive force features
    Features(CommonArgs),
    /// Roll out K goal-driven trajectory samples per window
    Simulate(CommonArgs),
    /// Score rollouts with displacement and near-collision metrics
    Evaluate(CommonArgs),
    /// Pivot evaluation output into one table, subsets across, metrics down
    Report(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Ingest(args) => ("ingest", args),
        Command::Groups(args) => ("groups", args),
        Command::Features(args) => ("features", args),
        Command::Simulate(args) => ("simulate", args),
        Command::Evaluate(args) => ("evaluate", args),
        Command::Report(args) => ("report", args),
    };
    let settings = match settings::resolve(args) {
        Ok(settings) => settings,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::FAILURE;
        }
    };
    match commands::run(name, &settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
