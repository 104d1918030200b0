//! `coopsense` — cooperative spectrum-sensing cluster planning from the
//! command line.
//!
//! Four commands, one contract: read a flat key=value configuration (file
//! plus `--set` overrides), write a CSV result and a `<output>.manifest`
//! sidecar that reproduces the run byte for byte.
//!
//! Exit codes: 0 on success (and an all-pass validation), 1 when the
//! validation grid fails or a runtime error occurs, 2 on configuration
//! errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Parser)]
#[command(
    name = "coopsense",
    version,
    about = "Cluster-size planning for cooperative spectrum sensing",
    long_about = "Plans energy-detection clusters: per-SU thresholds under a total \
                  detection constraint, fused false-alarm rates, throughput sweeps \
                  over the cluster size, and a seeded Monte Carlo validation grid."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value configuration file; later --set overrides win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Inline override, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output CSV path; the manifest is written to <output>.manifest.
    #[arg(long, short, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Throughput table over (rule, SNR, cluster size), argmax rows marked
    Sweep(RunArgs),
    /// Optimal cluster size per (rule, SNR) curve
    Optimize(RunArgs),
    /// Monte Carlo / analytic agreement grid (exit 1 if it fails)
    Validate(RunArgs),
    /// Search (ts, target) settings that reproduce reference optima pairs
    Calibrate(RunArgs),
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let (args, name): (&RunArgs, &str) = match &cli.command {
        Command::Sweep(args) => (args, "sweep"),
        Command::Optimize(args) => (args, "optimize"),
        Command::Validate(args) => (args, "validate"),
        Command::Calibrate(args) => (args, "calibrate"),
    };
    let resolved = config::load(args.config.as_deref(), &args.set)?;
    match name {
        "sweep" => commands::cmd_sweep(&resolved, &args.output)?,
        "optimize" => commands::cmd_optimize(&resolved, &args.output)?,
        "validate" => {
            if !commands::cmd_validate(&resolved, &args.output)? {
                return Ok(ExitCode::from(1));
            }
        }
        "calibrate" => commands::cmd_calibrate(&resolved, &args.output)?,
        _ => unreachable!(),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<ConfigError>() { ExitCode::from(2) } else { ExitCode::from(1) }
        }
    }
}
