//! `demandlens`: run injectivity diagnostics and inversions from a JSON spec.
//!
//! Exit status: 0 when every task completed without a violation
//! (inconclusive verdicts count as completed), 2 when some diagnostic found
//! a violation, 1 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use demandlens_core::config::load_config_with_fallback_seed;
use demandlens_core::report::{
    emit_report, emit_witness_csv, read_text, run_with_options, write_text, RunOptions,
};
use demandlens_core::RunSpec;

/// Seed used when the spec has none.
const SEED_ENV: &str = "DEMANDLENS_SEED";

#[derive(Parser)]
#[command(
    name = "demandlens",
    version,
    about = "Law-of-demand and injectivity diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every task of a run specification and write the report.
    Run {
        spec: PathBuf,
        /// Report destination; overrides `output.report_path`. Stdout if
        /// neither is given.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV witness dump; overrides `output.witness_csv_path`.
        #[arg(long)]
        witness_csv: Option<PathBuf>,
        /// Run independent tasks on N worker threads.
        #[arg(long, value_name = "N")]
        parallel: Option<usize>,
        /// Include wall-clock seconds per task (the report is then no
        /// longer reproducible byte for byte).
        #[arg(long)]
        timings: bool,
    },
    /// Parse and validate a run specification without running it.
    Validate { spec: PathBuf },
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn load(path: &Path) -> Result<RunSpec> {
    let text = read_text(path)?;
    load_config_with_fallback_seed(&text, env_seed()?)
        .with_context(|| format!("invalid run specification {}", path.display()))
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { spec } => {
            let parsed = load(&spec)?;
            println!(
                "ok: {} task(s), dimension {}, seed {}",
                parsed.tasks.len(),
                parsed.system.dim(),
                parsed.seed
            );
            Ok(0)
        }
        Command::Run {
            spec,
            out,
            witness_csv,
            parallel,
            timings,
        } => {
            let parsed = load(&spec)?;
            let report = run_with_options(&parsed, RunOptions { parallel, timings });
            let text = emit_report(&report)?;
            match out.or_else(|| parsed.output.report_path.clone()) {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            if let Some(path) = witness_csv.or_else(|| parsed.output.witness_csv_path.clone()) {
                write_text(&path, &emit_witness_csv(&report)?)?;
            }
            for f in &report.failures {
                eprintln!("task {} ({}) failed: {}", f.task, f.name, f.error);
            }
            Ok(report.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
