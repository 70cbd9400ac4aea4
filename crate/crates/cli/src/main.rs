//! `cavnet`: configuration-driven runner for hops, chains, sweeps, fits and
//! model comparisons. Exit codes: 0 success, 2 validation error,
//! 3 numerical-accuracy error, 1 anything else.

mod config;
mod run;

use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, Kind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical accuracy error: {0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<cavnet::Error> for CliError {
    fn from(e: cavnet::Error) -> Self {
        match e {
            cavnet::Error::InvalidArgument(_) => CliError::Validation(e.to_string()),
            cavnet::Error::Integration { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "cavnet", version, about = "Cavity-interconnect simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
pub struct GlobalArgs {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Accept sweep ranges outside the supported parameter bounds.
    #[arg(long, global = true)]
    allow_out_of_range: bool,
    /// Overrides the config `n_samples`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads for sweeps and sampling.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Single state transfer between two chips.
    Hop,
    /// State transfer along a chain of chips.
    Chain,
    /// Per-node fidelity over a parameter sweep.
    Sweep,
    /// Model calibration: hyperparameter grid search or power-law fit.
    Fit,
    /// Master-equation versus network-model comparison report.
    Compare,
    /// Link latency table.
    Latency,
}

impl Command {
    fn kind(self) -> Kind {
        match self {
            Command::Hop => Kind::Hop,
            Command::Chain => Kind::Chain,
            Command::Sweep => Kind::Sweep,
            Command::Fit => Kind::Fit,
            Command::Compare => Kind::Compare,
            Command::Latency => Kind::Latency,
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let path = g.config.ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(n) = g.samples {
        cfg.n_samples = n;
    }
    if let Some(j) = g.jobs {
        if j == 0 {
            return Err(CliError::Validation("--jobs must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(|e| CliError::Other(e.to_string()))?;
    }
    let kind = cli.command.kind();
    cfg.validate(kind)?;
    let out_dir = g.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("cavnet-out"));
    let outputs = run::run(kind, &cfg, g.allow_out_of_range)?;
    outputs.write(&out_dir, kind, &cfg)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
