//! `v2vsim`: topology evolution, routing queries, fuel evaluation and exports
//! driven by a single TOML config.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Run;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "v2vsim", version, about = "V2V topology and vehicle fuel simulator")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a spanning forest per snapshot; write forests.jsonl and metrics.csv.
    Topology,
    /// Evaluate fuel use of one vehicle's speed trace.
    Fuel {
        /// Vehicle id in the trace; without it the config's fuel.speeds file is used.
        #[arg(long)]
        vehicle: Option<String>,
    },
    /// Route between two vehicles at the snapshot nearest a time.
    Route {
        #[arg(long)]
        time: f64,
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
    },
    /// Generate the configured synthetic trace as FCD XML.
    Synth,
    /// Write GeoJSON for every snapshot, or the one nearest --time.
    Export {
        #[arg(long)]
        time: Option<f64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let path = cli
        .config
        .ok_or_else(|| anyhow::anyhow!("--config <path> is required"))?;
    let run = Run::new(RunConfig::load(&path)?, cli.seed, cli.out);
    match &cli.command {
        Command::Topology => commands::topology(&run),
        Command::Fuel { vehicle } => commands::fuel(&run, vehicle.as_deref()),
        Command::Route { time, src, dst } => commands::route_query(&run, *time, src, dst),
        Command::Synth => commands::synth(&run),
        Command::Export { time } => commands::export(&run, *time),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("V2VSIM_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
