//! Command-line front end: each subcommand writes CSV or JSON files plus a
//! run manifest into the output directory.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 when a
//! command completes but a check fails (regime margin at or below 10, oracle
//! disagreement).

pub mod args;
pub mod commands;
pub mod manifest;

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;

use spin_readout::config::{parse_params, ConfigError};
use spin_readout::SystemParams;

pub use args::Cli;
use args::Command;
use commands::OracleOptions;
pub use manifest::{config_digest, Run, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error(transparent)]
    Model(#[from] spin_readout::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Display, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// Result of a completed command.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub manifest: PathBuf,
}

pub fn load_params(path: Option<&PathBuf>) -> Result<SystemParams, CliError> {
    let Some(path) = path else {
        return Ok(SystemParams::reference());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    parse_params(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

/// Runs one command, on a dedicated pool when `--workers` is given.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.common.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let params = load_params(cli.common.config.as_ref())?;
    fs::create_dir_all(&cli.common.out).map_err(|e| CliError::io(cli.common.out.display(), e))?;
    let mut run = Run::new(cli.command.name(), cli.common.out.clone(), params, cli.common.seed.unwrap_or(0));
    let code = match &cli.command {
        Command::Regime => commands::regime(&mut run)?,
        Command::Curves { grid, n_bar, lambda } => commands::curves(&mut run, grid, n_bar.as_deref(), lambda.as_deref())?,
        Command::Snr { grid, lambda } => commands::snr(&mut run, grid, lambda)?,
        Command::SnrMap { grid, delta_grid, n_realizations } => {
            commands::snr_map_cmd(&mut run, grid, delta_grid, *n_realizations)?
        }
        Command::Squeeze { grid, lambda, xi2, t_sqz, axis } => {
            commands::squeeze(&mut run, grid, *lambda, xi2.as_deref(), t_sqz.as_deref(), *axis)?
        }
        Command::Runs { grid, lambda, xi2 } => commands::runs(&mut run, grid, *lambda, *xi2)?,
        Command::Oracle { mode, grid, n_traj, oracle_spins, t_sqz, axis, ratios, detuning_hz } => commands::oracle(
            &mut run,
            cli.common.seed.is_some(),
            OracleOptions {
                mode: *mode,
                grid,
                n_traj: *n_traj,
                oracle_spins: *oracle_spins,
                t_sqz: *t_sqz,
                axis: *axis,
                ratios,
                detuning_hz: *detuning_hz,
            },
        )?,
    };
    let manifest = run.finish()?;
    Ok(Outcome { exit_code: code, manifest })
}
