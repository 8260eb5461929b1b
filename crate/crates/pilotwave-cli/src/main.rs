use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pilotwave_cli::config::ScenarioConfig;
use pilotwave_cli::runner::{
    run_classical, run_conserve, run_ensemble, run_evolve, run_trajectory, RunOptions,
};
use pilotwave_cli::CliError;

/// Relativistic pilot-wave laboratory: evolve lattice wavefunctions, ride
/// their probability flow, and check the statistics against quantum
/// predictions. Runs are deterministic in (config, seed).
#[derive(Parser)]
#[command(name = "pilotwave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Mode {
    Evolve,
    Trajectory,
    Ensemble,
    Conserve,
    Classical,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the field and export the final slice and its current.
    Evolve(RunArgs),
    /// Integrate one particle worldline and its diagnostics.
    Trajectory(RunArgs),
    /// Propagate a position ensemble and test equivariance.
    Ensemble(RunArgs),
    /// Assemble the energy-momentum tensor and check conservation.
    Conserve(RunArgs),
    /// Classical testbeds: uniform electric field, static scalar potential.
    Classical(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override the ensemble seed from the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress per-file progress lines.
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &RunArgs, run: impl Fn(&ScenarioConfig, &RunOptions) -> Result<(), CliError>) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(vec![format!("cannot read {}: {e}", args.config.display())])
    })?;
    let config = ScenarioConfig::from_toml(&text).map_err(CliError::Config)?;
    let opts = RunOptions {
        out_dir: &args.out,
        seed_override: args.seed,
        quiet: args.quiet,
    };
    run(&config, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve(args) => execute(args, run_evolve),
        Command::Trajectory(args) => execute(args, run_trajectory),
        Command::Ensemble(args) => execute(args, run_ensemble),
        Command::Conserve(args) => execute(args, run_conserve),
        Command::Classical(args) => execute(args, run_classical),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
