//! `blockade`: runs the blockade, ejection, emission and scheduling studies
//! and writes CSV/JSON results.

mod config;
mod eject;
mod emission;
mod fig1;
mod output;
mod schedule;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use blockade_sources::Error as CoreError;
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use output::{Provenance, Writer};

const DEFAULT_SEED: u64 = 2024;

#[derive(Parser, Debug)]
#[command(name = "blockade", version, about = "Dipole-blockade atom and photon source simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config; defaults to the bundled config of the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: number of processors).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Treat warnings as numerical failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Blockade imperfection versus atom number.
    Fig1,
    /// State-selective ejection: potentials, trajectories, collimation.
    Eject,
    /// Far-field single-photon patterns and lobe metrics.
    Emission,
    /// Timing of the m-atom pulse source.
    Schedule,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Eject => "eject",
            Command::Emission => "emission",
            Command::Schedule => "schedule",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::TooFewAtoms { .. } => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub writer: Writer<'a>,
    pub strict: bool,
}

impl Context<'_> {
    /// Fails the run under `--strict`; otherwise the caller records the warning.
    pub fn finish(&self, warnings: &[String]) -> Result<(), CliError> {
        for w in warnings {
            eprintln!("warning: {w}");
        }
        if self.strict && !warnings.is_empty() {
            return Err(CliError::Numerical(format!("strict mode: {}", warnings.join("; "))));
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => config::bundled(cli.command.name()).to_string(),
    };
    let mut config = ExperimentConfig::parse(&text)?;
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    config.seed = Some(seed);

    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    }

    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema: output::SCHEMA_VERSION,
        command: cli.command.name(),
        seed,
        config: &config,
    };
    let ctx = Context {
        config: &config,
        seed,
        writer: Writer::new(&cli.out, provenance)?,
        strict: cli.strict,
    };
    match cli.command {
        Command::Fig1 => fig1::run(&ctx),
        Command::Eject => eject::run(&ctx),
        Command::Emission => emission::run(&ctx),
        Command::Schedule => schedule::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
