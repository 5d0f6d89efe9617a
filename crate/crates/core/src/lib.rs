//! Dispersive homodyne readout of solid-state spin ensembles.
//!
//! A resonator far detuned from an ensemble of spins acquires a frequency
//! pull `chi_j` from each excited spin; homodyne detection of the output
//! field integrates that pull over a collection time while the spins decay.
//! This crate evaluates the mean record, its spin-projection and shot-noise
//! variance, and the resulting Ramsey signal-to-noise ratio, and checks those
//! closed forms against brute-force oracles.
//!
//! * [`model`]: parameters, per-spin coefficients, validity margins.
//! * [`analytic`]: closed-form signal, noise, SNR, squeezing and run counts.
//! * [`ensemble`]: disorder sampling and disorder-averaged SNR maps.
//! * [`oracle`]: trajectory sampling, exact twisting and eigenvalue checks.
//! * [`config`] and [`output`]: file formats.

pub mod analytic;
pub mod config;
pub mod ensemble;
mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod output;

pub use error::{Error, Result};
pub use model::{
    check_regime, cooperativities, derive_couplings, effective_lambda, measurement_quality,
    Cooperativities, InitialState, RegimeReport, SpinEnsemble, SystemParams, MARGIN_UNBOUNDED,
};
