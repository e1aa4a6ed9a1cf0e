use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use umet_cli::{describe, run_with_env, validate, ExperimentConfig};

#[derive(Parser)]
#[command(name = "umet", version, about = "Exact uniform ergodic experiments on [0,1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its artifacts (UMET_OUT_DIR overrides `output`).
    Run { config: PathBuf },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Describe a map spec (e.g. `odometer:R=4`) or a family spec (e.g. `digit_sets:max_index=8`).
    Describe { spec: String },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse().map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let experiment = config.file_stem().and_then(|s| s.to_str()).unwrap_or(cfg.scenario.name()).to_string();
            let (dir, outcome) = run_with_env(&cfg, &experiment)?;
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for failure in &outcome.failures {
                eprintln!("audit failed: {failure}");
            }
            println!("{} artifacts in {}", outcome.files.len(), dir.display());
            Ok(outcome.failures.is_empty())
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            validate(&cfg)?;
            print!("{cfg}");
            Ok(true)
        }
        Command::Describe { spec } => {
            print!("{}", describe(&spec)?);
            Ok(true)
        }
    }
}
