//! `trhsim`: MinTRH analytics and Monte Carlo simulation of in-DRAM trackers.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "trhsim", version, about)]
struct Cli {
    /// Experiment config file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `tables`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    tracker: Option<String>,
    #[arg(long, global = true)]
    pattern: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// MinTRH for each requested tracker.
    Mintrh,
    /// MinTRH across a grid of one variable.
    Sweep,
    /// Monte Carlo failure probability.
    Simulate,
    /// Every table in one run.
    Tables,
    /// Print the effective configuration.
    Config,
}

/// Failures that map to exit code 2.
fn is_internal(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<trhsim_core::Error>(),
            Some(trhsim_core::Error::ContractViolation(_))
        )
    })
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse_text(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(v) = &cli.tracker {
        cfg.set("tracker", v)?;
    }
    if let Some(v) = &cli.pattern {
        cfg.set("pattern", v)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let out = cfg.out.as_deref();
    match cli.command {
        Command::Mintrh => emit(out, &commands::mintrh(&cfg)?),
        Command::Sweep => emit(out, &commands::sweep(&cfg)?),
        Command::Simulate => {
            let result = commands::simulate(&cfg)?;
            if let (Some(path), Some(csv)) = (&cfg.per_trial_csv, &result.per_trial) {
                emit(Some(path), csv)?;
            }
            emit(out, &result.summary)
        }
        Command::Tables => {
            let tables = commands::tables(&cfg)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    for (name, csv) in &tables {
                        emit(Some(&dir.join(format!("{name}.csv"))), csv)?;
                    }
                    Ok(())
                }
                None => {
                    let joined: Vec<String> = tables.iter().map(|(name, csv)| format!("# {name}\n{csv}")).collect();
                    emit(None, &joined.join("\n"))
                }
            }
        }
        Command::Config => emit(out, &cfg.to_text()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_internal(&err) { 2 } else { 1 })
        }
        Err(_) => ExitCode::from(2),
    }
}
