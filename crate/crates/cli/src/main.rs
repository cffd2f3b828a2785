//! `mibn`: exact transition matrices, chain structure and simulations for
//! periodically measured open quantum networks.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigError, ExperimentConfig};

/// Environment variable holding the worker-thread count.
const THREADS_VAR: &str = "MIBN_THREADS";

#[derive(Parser)]
#[command(name = "mibn", version, about = "Measurement-induced Boolean networks of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Exact transition matrix at the configured period.
    Transition(Common),
    /// Communication classes, absorbing states and periods.
    Classes(Common),
    /// Stationary distribution and expected post-measurement state.
    Stationary(Common),
    /// Monte-Carlo trajectories and empirical transition frequencies.
    Simulate(Common),
    /// Chain structure over a grid of measurement periods.
    ScanTau(Common),
    /// Reproduces the three-qubit path-graph consensus example.
    #[command(name = "verify-paper")]
    VerifyReference {
        /// Run the same checks on the consensus graph of this config instead.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] mibn_core::Error),
    #[error("writing outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (common, outputs) = match &cli.command {
        Command::VerifyReference { config } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let rows = commands::verify_reference(cfg.as_ref())?;
            println!("{:<14} {:<6} detail", "check", "status");
            let mut failed = 0;
            for r in &rows {
                let status = match r.status {
                    Some(true) => "pass",
                    Some(false) => {
                        failed += 1;
                        "FAIL"
                    }
                    None => "skip",
                };
                println!("{:<14} {:<6} {}", r.name, status, r.detail);
            }
            return if failed == 0 {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("{failed} check(s) failed")))
            };
        }
        Command::Transition(c) => (c, commands::transition(&ExperimentConfig::load(&c.config)?, c.format)?),
        Command::Classes(c) => (c, commands::classes(&ExperimentConfig::load(&c.config)?)?),
        Command::Stationary(c) => (c, commands::stationary(&ExperimentConfig::load(&c.config)?, c.format)?),
        Command::Simulate(c) => (c, commands::simulate(&ExperimentConfig::load(&c.config)?, c.seed, c.format)?),
        Command::ScanTau(c) => (c, commands::scan_tau(&ExperimentConfig::load(&c.config)?, c.format)?),
    };
    for path in outputs.commit(&common.out)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
