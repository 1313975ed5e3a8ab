//! `satrep`: repeated-measurement analysis from JSON problem files.
//!
//! Exit codes: 0 for an affirmative result (finite saturation, preorder
//! holds, simulation/table produced), 2 for a negative decision (cap
//! exceeded, preorder fails), 1 for any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use satrep::commands::{
    cmd_hellinger, cmd_preorder, cmd_saturation, cmd_simulate, HellingerArgs, PreorderArgs,
    SaturationArgs, SimulateArgs,
};

#[derive(Parser)]
#[command(name = "satrep", version, about = "Repeated quantum measurements: saturation steps, post-processing preorder, trajectory statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the least number of repetitions after which another round adds no information.
    Saturation {
        /// Problem file describing an instrument.
        problem: PathBuf,
        /// Highest repetition level to test.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Cap on enumerated outcome sequences per level.
        #[arg(long, default_value_t = 4096)]
        enum_cap: usize,
        /// JSON file with tolerance overrides.
        #[arg(long)]
        tol_file: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the first observable is a classical post-processing of the second.
    Preorder {
        /// Problem file for the coarser observable.
        problem_a: PathBuf,
        /// Problem file for the finer observable.
        problem_b: PathBuf,
        #[arg(long)]
        tol_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample repeated-measurement trajectories and histogram the outcome frequencies.
    Simulate {
        /// Problem file describing a binary-outcome instrument.
        problem: PathBuf,
        /// RNG seed; trajectories use one ChaCha stream each.
        #[arg(long)]
        seed: u64,
        /// Measurement repetitions per trajectory.
        #[arg(long, default_value_t = 200)]
        n_steps: usize,
        /// Number of trajectories.
        #[arg(long, default_value_t = 1000)]
        n_traj: usize,
        /// Uniform histogram bins over [0, 1].
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        tol_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-trajectory final frequencies as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Table of squared Hellinger distances between repeated-outcome distributions.
    Hellinger {
        /// Problem file describing the instrument (effect-shaped files get a closed-form column).
        problem: PathBuf,
        /// Table rows n = 1..=n_max.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Cap on enumerated outcome sequences per level.
        #[arg(long, default_value_t = 4096)]
        enum_cap: usize,
        #[arg(long)]
        tol_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Saturation { problem, n_max, enum_cap, tol_file, out } => {
            cmd_saturation(&SaturationArgs { problem, n_max, enum_cap, tol_file, out })
        }
        Command::Preorder { problem_a, problem_b, tol_file, out } => {
            cmd_preorder(&PreorderArgs { problem_a, problem_b, tol_file, out })
        }
        Command::Simulate { problem, seed, n_steps, n_traj, bins, tol_file, out, csv } => {
            cmd_simulate(&SimulateArgs { problem, seed, n_steps, n_traj, bins, tol_file, out, csv })
        }
        Command::Hellinger { problem, n_max, enum_cap, tol_file, out } => {
            cmd_hellinger(&HellingerArgs { problem, n_max, enum_cap, tol_file, out })
        }
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
