//! `degen-fv`: runs, refinement studies and consistency checks driven by a
//! JSON configuration.
//!
//! Exit status: 0 on success, 1 when a solve step fails, an invariant is
//! violated or a check does not pass, 2 for unreadable or invalid
//! configurations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod check;
mod config;
mod run;
mod study;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Solve(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Solve(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "degen-fv", version, about = "Implicit finite volume solver for degenerate convection-diffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March one configuration and write states, diagnostics and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's `output`, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run successive mesh refinements and tabulate Cauchy differences.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate the problem, the mesh and the numerical flux.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(config: &RunConfig, flag: Option<PathBuf>, fallback: &str) -> PathBuf {
    flag.or_else(|| config.output.clone()).unwrap_or_else(|| Path::new(fallback).to_path_buf())
}

fn execute(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run { config, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(&config, out, "out");
            let outcome = run::run(&config, &dir)?;
            match &outcome.failure {
                None => {
                    let r = outcome.report.as_ref().expect("successful runs carry a report");
                    println!(
                        "ok: {} steps to t = {}, entropy worst {}, mass drift {:e}; wrote {}",
                        r.steps,
                        r.final_time,
                        r.entropy_worst_violation.map_or("n/a".to_string(), |e| format!("{e:e}")),
                        r.mass_drift,
                        dir.display()
                    );
                    Ok(true)
                }
                Some(f) => {
                    eprintln!("run failed: {f}");
                    Ok(false)
                }
            }
        }
        Command::Study { config, levels, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(&config, out, "study");
            let summary = study::study(&config, levels, &dir)?;
            println!("wrote {} of {levels} rows to {}", summary.rows, dir.join("study.csv").display());
            if let Some(f) = &summary.failure {
                eprintln!("study aborted: {f}");
            }
            Ok(summary.failure.is_none())
        }
        Command::Check { config, out } => {
            let config = RunConfig::load(&config)?;
            let report = check::check(&config)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            if let Some(path) = out {
                std::fs::write(path, format!("{json}\n"))?;
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
