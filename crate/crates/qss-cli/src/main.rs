//! `qss` — pseudospectral toolkit for the coupled quadratic Schrödinger
//! system: ground states, time evolution and verification scenarios.

mod commands;
mod config;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{EXIT_CONFIG, EXIT_CRITERION_FAILED};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "qss", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a ground state and its diagnostics.
    Groundstate(CommonArgs),
    /// Integrate the evolution system from the configured preset.
    Evolve(CommonArgs),
    /// Run a named verification experiment.
    Scenario {
        /// One of: blowup, stability, instability, virial-verify, gn-check.
        name: String,
        #[command(flatten)]
        args: CommonArgs,
    },
}

#[derive(clap::Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized scenario pieces; overrides [run].seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Groundstate(args) | Command::Evolve(args) => args,
        Command::Scenario { args, .. } => args,
    };

    let config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("cannot create output directory: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let seed = args.seed.unwrap_or(config.run.seed);

    let outcome: Result<u8> = match &cli.command {
        Command::Groundstate(_) => commands::cmd_groundstate(&config, &args.out),
        Command::Evolve(_) => commands::cmd_evolve(&config, &args.out),
        Command::Scenario { name, .. } => commands::cmd_scenario(name, &config, &args.out, seed),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CRITERION_FAILED)
        }
    }
}
