use thiserror::Error;

/// Errors produced by the readout model, the analytic theory and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("every spin violates the dispersive condition |Delta - delta_j| > g_j sqrt(n_bar)")]
    AllSpinsDiscarded,

    #[error("SNR is undefined at zero collection time")]
    UndefinedSnr,

    #[error("run-count threshold diverges: {0}")]
    DivergentThreshold(&'static str),

    #[error("ratio is undefined because the homogenized reference vanishes")]
    UndefinedRatio,

    #[error("symmetric-subspace dimension too large: {n_spins} spins (maximum {max})")]
    SizeLimit { n_spins: usize, max: usize },

    #[error("spin and resonator branches are not separable (|Delta - delta| = {detuning:e}, g = {coupling:e})")]
    BranchAmbiguity { detuning: f64, coupling: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}
