use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "spin-readout", version, about = "Dispersive readout noise, SNR and oracle checks for spin ensembles")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file (JSON, rates in Hz). Built-in reference values when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Collection-time grid in units of the relevant decay time.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct TimeGrid {
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long, value_enum)]
    pub t_scale: Option<Scale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Squeezed,
    AntiSqueezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Variance,
    Squeeze,
    Dispersive,
    Correlator,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validity margins of the dispersive model; exit 2 if any is 10 or less.
    Regime,
    /// Spin noise, shot noise and total variance against collection time.
    Curves {
        #[command(flatten)]
        grid: TimeGrid,
        /// Comma-separated photon numbers.
        #[arg(long)]
        n_bar: Option<String>,
        /// Comma-separated measurement qualities, converted to photon numbers.
        #[arg(long, conflicts_with = "n_bar")]
        lambda: Option<String>,
    },
    /// Homogeneous SNR / sqrt(N) against gamma T.
    Snr {
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long, default_value = "1,10,100")]
        lambda: String,
    },
    /// Disorder-averaged SNR over collection time and resonator detuning.
    SnrMap {
        #[command(flatten)]
        grid: TimeGrid,
        /// Resonator detunings in units of the inhomogeneous width.
        #[arg(long, default_value = "0.2:50:30:log")]
        delta_grid: String,
        #[arg(long, default_value_t = 10)]
        n_realizations: usize,
    },
    /// Variance change of squeezed or anti-squeezed initial states.
    Squeeze {
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long)]
        lambda: Option<f64>,
        /// Comma-separated Wineland parameters.
        #[arg(long)]
        xi2: Option<String>,
        /// Comma-separated twisting times, used instead of --xi2.
        #[arg(long, conflicts_with = "xi2")]
        t_sqz: Option<String>,
        #[arg(long, value_enum, default_value = "squeezed")]
        axis: Axis,
    },
    /// Runs needed to resolve spin noise, and squeezing with --xi2.
    Runs {
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        xi2: Option<f64>,
    },
    /// Monte Carlo and eigenvalue checks of the closed forms. Requires --seed.
    Oracle {
        #[arg(value_enum)]
        mode: OracleMode,
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long, default_value_t = 100_000)]
        n_traj: usize,
        /// Spins in the desk-scale stand-in ensemble.
        #[arg(long)]
        oracle_spins: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        t_sqz: f64,
        #[arg(long, value_enum, default_value = "squeezed")]
        axis: Axis,
        /// Coupling ratios g / (Delta - delta) for the dispersive sweep.
        #[arg(long, default_value = "0.1,0.01,0.001")]
        ratios: String,
        /// Resonator-spin detuning of the dispersive sweep, in Hz.
        #[arg(long, default_value_t = 1e9)]
        detuning_hz: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Regime => "regime",
            Command::Curves { .. } => "curves",
            Command::Snr { .. } => "snr",
            Command::SnrMap { .. } => "snr-map",
            Command::Squeeze { .. } => "squeeze",
            Command::Runs { .. } => "runs",
            Command::Oracle { .. } => "oracle",
        }
    }
}
