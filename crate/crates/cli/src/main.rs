//! `attrgame` — reproducible experiments on attribute-selection defense
//! games.
//!
//! Subcommands: `solve`, `verify`, `attack`, `sweep`, `reward-build`,
//! `reward-validate`, and `rerun` (re-execute a run from its manifest).
//! Exit codes: 0 success, 1 input error, 2 numeric non-convergence.

mod commands;
mod manifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }

    pub fn input(err: impl std::fmt::Display) -> Self {
        CliError::Input(err.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "attrgame",
    version,
    about = "Zero-sum attribute-selection games: solve, certify, poison, and sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game given as a partition or an explicit payoff matrix.
    Solve(commands::solve::SolveArgs),
    /// Certify the uniform-random profile of an indicator game.
    Verify(commands::verify::VerifyArgs),
    /// Generate a poisoned sample stream and compare means to the formula.
    Attack(commands::attack::AttackArgs),
    /// Run the accuracy-vs-k abstraction sweep on a CSV dataset.
    Sweep(commands::sweep::SweepArgs),
    /// Build a reward payoff matrix from a quality table.
    RewardBuild(commands::reward::RewardBuildArgs),
    /// Check a quality table against the reward assumptions.
    RewardValidate(commands::reward::RewardValidateArgs),
    /// Re-execute a previous run from its manifest.
    Rerun(commands::rerun::RerunArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => commands::solve::run(&args),
        Command::Verify(args) => commands::verify::run(&args),
        Command::Attack(args) => commands::attack::run(&args),
        Command::Sweep(args) => commands::sweep::run(&args),
        Command::RewardBuild(args) => commands::reward::run_build(&args),
        Command::RewardValidate(args) => commands::reward::run_validate(&args),
        Command::Rerun(args) => commands::rerun::run(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
