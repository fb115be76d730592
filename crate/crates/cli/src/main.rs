//! `diffdrive`: closed-loop differential-drive robot simulator.
//!
//! Subcommands:
//! - `run <scenario>`: execute a named scenario and write `trace.csv`,
//!   `metrics.txt`, and gnuplot-ready `speed_*.dat` / `path.dat` files.
//! - `scenarios`: list the available scenario names.
//! - `validate --config PATH`: check a configuration file without running.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diffdrive_cli::config::load_config;
use diffdrive_cli::scenario::{run_scenario, Scenario, ALL_SCENARIOS};
use diffdrive_core::simulation::SimConfig;

#[derive(Parser)]
#[command(
    name = "diffdrive",
    about = "Deterministic closed-loop simulator for a two-wheeled differential-drive robot",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace, metrics, and plot data files
    Run {
        /// Scenario name; see `diffdrive scenarios`
        scenario: String,
        /// Configuration file (flat `key = value` lines)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for trace.csv, metrics.txt, and .dat files
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the random seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the feedback estimator: raw, lpf, or kf
        #[arg(long)]
        estimator: Option<String>,
    },
    /// List available scenarios
    Scenarios,
    /// Check a configuration file without running anything
    Validate {
        /// Configuration file to check
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            scenario,
            config,
            out,
            seed,
            estimator,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let mut sim_config = match config {
                Some(path) => load_config(&path).map_err(|e| e.to_string())?,
                None => SimConfig::default(),
            };
            if let Some(seed) = seed {
                sim_config.rng_seed = seed;
            }
            if let Some(mode) = estimator {
                sim_config.estimator = mode.parse().map_err(|e| format!("{e}"))?;
            }
            let outcome = run_scenario(scenario, &sim_config, &out).map_err(|e| e.to_string())?;
            println!(
                "{scenario}: {} steps -> {}",
                outcome.steps,
                out.join("trace.csv").display()
            );
            println!(
                "rms_speed_error={:.4} rad/s  path_closure={:.4} m",
                outcome.metrics.rms_speed_error_radps, outcome.metrics.path_closure_m
            );
            if let Some((kf, lpf)) = outcome.comparison {
                println!("settling_kf_s={kf:.3} settling_lpf_s={lpf:.3}");
            }
            Ok(())
        }
        Command::Scenarios => {
            for scenario in ALL_SCENARIOS {
                println!("{:<22} {}", scenario.name(), scenario.description());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let parsed = load_config(&config).map_err(|e| e.to_string())?;
            println!(
                "{} is valid (ts_s={}, estimator={}, seed={})",
                config.display(),
                parsed.ts_s,
                parsed.estimator,
                parsed.rng_seed
            );
            Ok(())
        }
    }
}
