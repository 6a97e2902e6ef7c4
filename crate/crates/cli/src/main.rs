//! `sim` — experiment runner for the photonic FMCW receiver simulation.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phodar_cli::config::{EngineSelection, ExperimentConfig};
use phodar_cli::error::CliError;
use phodar_cli::{presets, scenario};
use phodar_core::SweepAxis;

#[derive(Parser)]
#[command(name = "sim", version, about = "Photonic FMCW radar receiver simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file
    Run {
        config: PathBuf,
        /// Output directory (default: config output_dir, then $SIM_OUT_DIR)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario preset
    Preset {
        /// One of: empty, fig4, fig7, fig8, fig9
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Engine override: fast, physical or both
        #[arg(long)]
        engine: Option<String>,
        /// Seed override
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep cancellation depth along one mismatch axis
    Sweep {
        config: PathBuf,
        /// Axis: amplitude, delay or bias
        #[arg(long)]
        axis: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Automatically match the cancellation reference amplitude and delay
    Match {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output_dir(cli_out: Option<PathBuf>, cfg: &ExperimentConfig, suffix: &str) -> PathBuf {
    if let Some(dir) = cli_out {
        return dir;
    }
    if let Some(dir) = &cfg.scenario.output_dir {
        return PathBuf::from(dir);
    }
    let base = std::env::var_os("SIM_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("sim_out"));
    base.join(format!("{}{suffix}", cfg.scenario.name))
}

fn parse_axis(axis: &str) -> Result<SweepAxis, CliError> {
    match axis {
        "amplitude" => Ok(SweepAxis::Amplitude),
        "delay" => Ok(SweepAxis::Delay),
        "bias" => Ok(SweepAxis::Bias),
        other => Err(CliError::config(format!(
            "unknown sweep axis '{other}' (expected amplitude|delay|bias)"
        ))),
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output_dir(out, &cfg, "");
            let manifest = scenario::run_scenario(&cfg, &dir)?;
            println!(
                "{}: {} output(s) in {} ({:.0} ms)",
                cfg.scenario.name,
                manifest.outputs.len(),
                dir.display(),
                manifest.wall_clock_ms
            );
        }
        Command::Preset {
            name,
            out,
            engine,
            seed,
        } => {
            let mut cfg = presets::preset(&name)?;
            if let Some(engine) = engine {
                cfg.scenario.engine = EngineSelection::parse(&engine)?;
            }
            if let Some(seed) = seed {
                cfg.scenario.seed = seed;
            }
            let dir = output_dir(out, &cfg, "");
            let manifest = scenario::run_scenario(&cfg, &dir)?;
            println!(
                "{}: {} output(s) in {} ({:.0} ms)",
                name,
                manifest.outputs.len(),
                dir.display(),
                manifest.wall_clock_ms
            );
        }
        Command::Sweep { config, axis, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let axis = parse_axis(&axis)?;
            let dir = output_dir(out, &cfg, &format!("_sweep_{}", axis.name()));
            scenario::run_sweep(&cfg, axis, &dir)?;
            println!("sweep_{}.csv written to {}", axis.name(), dir.display());
        }
        Command::Match { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output_dir(out, &cfg, "_match");
            scenario::run_match(&cfg, &dir)?;
            println!("match.csv written to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
