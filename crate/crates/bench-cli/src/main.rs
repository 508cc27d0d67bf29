//! `bench` — run sketching-for-least-squares benchmark grids.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bench_cli::{
    bound_rates, emit_bound_rates, emit_leverage_profiles, emit_manifest, emit_tables,
    leverage_profiles, run_experiment, ExperimentConfig, TableFormat,
};

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Benchmark randomized sketching for ordinary least squares",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the experiment config (JSON; `{}` selects the default grid).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Exact noise-averaged criteria per sketch draw.
    Closed,
    /// One realized noise vector per draw; ratio-of-means aggregates.
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full grid and write results.csv, aggregate.csv,
    /// leverage profiles, and manifest.json.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads (default: one per logical CPU).
        #[arg(long)]
        threads: Option<usize>,
        /// Criteria estimator; overrides the config's mc_mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Write only the per-ν sorted leverage-score profiles.
    Leverage {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate draws against the published efficiency bounds and write
    /// per-bound satisfaction rates to bounds.csv.
    CheckBounds {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { common, threads, mode } => {
            let mut config = load(&common)?;
            if let Some(mode) = mode {
                config.mc_mode = mode == Mode::Mc;
            }
            let table = match threads {
                Some(k) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(k)
                        .build()
                        .context("failed to build the worker pool")?;
                    pool.install(|| run_experiment(&config))?
                }
                None => run_experiment(&config)?,
            };
            let written = emit_tables(&table, TableFormat::Csv, &config.output_dir)?;
            println!(
                "wrote {} rows over {} cells ({} files) to {}",
                table.rows.len(),
                table.aggregates.len(),
                written.len(),
                config.output_dir.display()
            );
        }
        Command::Leverage { common } => {
            let config = load(&common)?;
            let profiles = leverage_profiles(&config)?;
            let written = emit_leverage_profiles(&profiles, &config.output_dir)?;
            emit_manifest(&config, &config.output_dir)?;
            println!(
                "wrote {} leverage profiles to {}",
                written.len(),
                config.output_dir.display()
            );
        }
        Command::CheckBounds { common } => {
            let config = load(&common)?;
            let rows = bound_rates(&config)?;
            let path = emit_bound_rates(&rows, &config.output_dir)?;
            emit_manifest(&config, &config.output_dir)?;
            println!("wrote {} bound rates to {}", rows.len(), path.display());
        }
    }
    Ok(())
}
