//! `qcausal <command> --config <scenario.toml> [--out path] [--seed N]`
//!
//! Exit status: 0 success, 1 computational failure (a failed check or a
//! numerical error), 2 configuration error.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::commands::CommandOutput;
use crate::config::ScenarioConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Compute(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "qcausal", version, about = "Scenario runner for sequential-measurement and causality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint, pre-conditioned and post-conditioned outcome tables
    Probabilities(RunArgs),
    /// Post-conditioning with a fine and a coarse projector family
    Contextuality(RunArgs),
    /// Bob's ensemble averages under a nonlinear law
    Signaling {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the time series as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Signal onset seen from a moving frame
    Onset(RunArgs),
    /// Constraint checks for a region-operator family
    #[command(name = "verify-b")]
    VerifyB(RunArgs),
    /// Statistics of a theory against its gauge-transformed copy
    Gauge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Add wall-clock milliseconds to the report (breaks byte-identity)
    #[arg(long)]
    timing: bool,
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    inputs_digest: String,
    seed: u64,
    outputs: &'a serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

fn inputs_digest(config_text: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    h.update(format!("\nseed={seed}").as_bytes());
    hex::encode(h.finalize())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))
}

fn run(name: &str, args: &RunArgs, csv: Option<&Path>) -> Result<Option<String>, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let start = Instant::now();
    let out: CommandOutput = match name {
        "probabilities" => commands::probabilities(&cfg),
        "contextuality" => commands::contextuality(&cfg),
        "signaling" => commands::signaling(&cfg),
        "onset" => commands::onset(&cfg),
        "verify-b" => commands::verify_b(&cfg),
        "gauge" => commands::gauge(&cfg),
        other => unreachable!("unhandled command {other}"),
    }?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = RunReport {
        command: name,
        inputs_digest: inputs_digest(&text, cfg.seed),
        seed: cfg.seed,
        outputs: &out.outputs,
        timing_ms: args.timing.then_some(elapsed),
    };
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    json.push('\n');
    match &args.out {
        Some(path) => write_text(path, &json)?,
        None => print!("{json}"),
    }
    if let (Some(path), Some(series)) = (csv, &out.csv) {
        write_text(path, series)?;
    }
    Ok(out.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, csv) = match &cli.command {
        Command::Probabilities(a) => ("probabilities", a, None),
        Command::Contextuality(a) => ("contextuality", a, None),
        Command::Signaling { run, csv } => ("signaling", run, csv.as_deref()),
        Command::Onset(a) => ("onset", a, None),
        Command::VerifyB(a) => ("verify-b", a, None),
        Command::Gauge(a) => ("gauge", a, None),
    };
    match run(name, args, csv) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("check failed: {failure}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qcausal {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
