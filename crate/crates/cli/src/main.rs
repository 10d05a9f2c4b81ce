use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use blockline_core::SimConfig;
use config::{load_file_config, Command, RunSpec};
use error::CliResult;

/// Estimate and simulate throughput, blocking, buffer occupancy, and block
/// delay of a block-coded transfer over a finite-buffer erasure line
/// network.
#[derive(Parser)]
#[command(name = "blockline", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the fixed-point estimator: arrival rates, blocking, throughput.
    Estimate(RunArgs),
    /// Estimator plus the full block-delay distribution.
    Delay(RunArgs),
    /// Run the protocol simulator.
    Simulate(RunArgs),
    /// Run both paths and report their agreement.
    Compare(RunArgs),
    /// Sweep one parameter (m, K, eps, eps_<link>) and tabulate.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON network/sim config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Fixed-point convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Fixed-point iteration limit.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Mass dropped per truncating PMF operation in the delay calculus.
    #[arg(long, default_value_t = 1e-9)]
    tail_tol: f64,
    /// Use the Gauss-Seidel update schedule instead of Jacobi.
    #[arg(long)]
    gauss_seidel: bool,
    /// Simulation seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Simulation horizon in epochs (overrides the config file).
    #[arg(long)]
    epochs: Option<u64>,
    /// Number of seeded replications (overrides the config file).
    #[arg(long)]
    replications: Option<usize>,
    /// Blocks excluded from delay statistics (overrides the config file).
    #[arg(long)]
    warmup_blocks: Option<u64>,
}

fn build_spec(command: Command, args: &RunArgs) -> CliResult<RunSpec> {
    let file = load_file_config(&args.config)?;
    let mut sim = file.sim;
    if sim.is_none() {
        if let Some(epochs) = args.epochs {
            sim = Some(SimConfig::new(epochs, args.seed.unwrap_or(0)));
        }
    }
    if let Some(sim) = sim.as_mut() {
        if let Some(epochs) = args.epochs {
            sim.epochs = epochs;
        }
        if let Some(seed) = args.seed {
            sim.seed = seed;
        }
        if let Some(replications) = args.replications {
            sim.replications = replications;
        }
        if let Some(warmup) = args.warmup_blocks {
            sim.warmup_blocks = warmup;
        }
    }
    let spec = RunSpec {
        command,
        network: file.network,
        sim,
        sweep: file.sweep,
        out_dir: args.out_dir.clone(),
        tol: args.tol,
        max_iter: args.max_iter,
        tail_tol: args.tail_tol,
        gauss_seidel: args.gauss_seidel,
    };
    spec.validate()?;
    Ok(spec)
}

fn run(cli: &Cli) -> CliResult<()> {
    let (command, args) = match &cli.command {
        Cmd::Estimate(a) => (Command::Estimate, a),
        Cmd::Delay(a) => (Command::Delay, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let spec = build_spec(command, args)?;
    commands::run(&spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
