//! Command-line experiments for partially congested viscous shock fronts:
//! profile computation, matched-expansion error sweeps, barrier checks, PDE
//! stability runs and report aggregation. Every run writes deterministic data
//! files plus a manifest.json recording the resolved configuration and gates.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::Config;

#[derive(Parser)]
#[command(name = "vshock", version, about = "Partially congested viscous shock front experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file with dotted namespaces (model.epsilon, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config key (repeatable): --set model.epsilon=1e-4
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Concurrent runs for sweep commands.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Args)]
struct ReportArgs {
    /// Manifest files or run directories to aggregate.
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute traveling fronts for an epsilon list plus the limit front.
    Profile(RunArgs),
    /// Matched-expansion error tables and the transition rate fit.
    Expansion(RunArgs),
    /// Barrier functions, crossings and the sandwich check.
    Barriers(RunArgs),
    /// Full PDE run with a zero-mass perturbation.
    Simulate(RunArgs),
    /// dt-refinement study of the linearized energy identity.
    LinearizedCheck(RunArgs),
    /// Fan a command out over an epsilon list, concurrently.
    Sweep(RunArgs),
    /// Aggregate manifests into a pass/fail summary.
    Report(ReportArgs),
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Profile(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::profile::run(&cfg, &a.out)
        }
        Command::Expansion(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::expansion::run(&cfg, &a.out)
        }
        Command::Barriers(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::barriers::run(&cfg, &a.out)
        }
        Command::Simulate(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::simulate::run_cmd(&cfg, &a.out)
        }
        Command::LinearizedCheck(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::linearized::run(&cfg, &a.out)
        }
        Command::Sweep(a) => {
            let cfg = Config::load(a.config.as_deref(), &a.set)?;
            commands::sweep::run(&cfg, &a.out, a.jobs)
        }
        Command::Report(a) => commands::report::run(&a.inputs, &a.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
