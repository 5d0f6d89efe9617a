//! Disordered ensembles and disorder-averaged sweeps.

mod map;

pub use map::{snr_map, SnrMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analytic::{signal_mean, spin_noise};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{derive_couplings, SpinEnsemble, SystemParams};

/// Distribution of spin transition frequencies around the band center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyDistribution {
    Gaussian { sigma: f64 },
    /// Cauchy distribution with half-width at half-maximum `hwhm`.
    Lorentzian { hwhm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    pub distribution: FrequencyDistribution,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Subtract the sample mean so that the detunings sum to zero.
    pub recenter: bool,
}

impl DisorderConfig {
    pub fn gaussian(sigma: f64, n_realizations: usize, master_seed: u64) -> Self {
        DisorderConfig {
            distribution: FrequencyDistribution::Gaussian { sigma },
            n_realizations,
            master_seed,
            recenter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.distribution {
            FrequencyDistribution::Gaussian { sigma } => ensure_positive("sigma", sigma)?,
            FrequencyDistribution::Lorentzian { hwhm } => ensure_positive("hwhm", hwhm)?,
        }
        if self.n_realizations == 0 {
            return Err(Error::invalid("n_realizations", "must be at least 1"));
        }
        Ok(())
    }

    fn rng(&self, realization_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(realization_index as u64);
        rng
    }
}

/// Spin detunings `delta_j` of one realization. Deterministic in
/// `(master_seed, realization_index)`.
pub fn sample_frequencies(
    config: &DisorderConfig,
    realization_index: usize,
    n_spins: usize,
) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rng = config.rng(realization_index);
    let mut out: Vec<f64> = match config.distribution {
        FrequencyDistribution::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
            (0..n_spins).map(|_| normal.sample(&mut rng)).collect()
        }
        FrequencyDistribution::Lorentzian { hwhm } => (0..n_spins)
            .map(|_| {
                let u: f64 = rng.random();
                hwhm * (std::f64::consts::PI * (u - 0.5)).tan()
            })
            .collect(),
    };
    if config.recenter && n_spins > 0 {
        let mean = out.iter().sum::<f64>() / n_spins as f64;
        out.iter_mut().for_each(|d| *d -= mean);
    }
    Ok(out)
}

/// Samples one realization with homogeneous coupling `g` and applies the
/// discard rule.
pub fn build_realization(params: &SystemParams, config: &DisorderConfig, index: usize) -> Result<SpinEnsemble> {
    params.validate()?;
    let delta = sample_frequencies(config, index, params.n_spins)?;
    derive_couplings(params, &delta, &vec![params.g; params.n_spins])
}

/// The ensemble with every retained spin replaced by the retained-spin means
/// of `chi`, `gamma` and the initial polarization.
pub fn homogenized(ensemble: &SpinEnsemble) -> Result<SpinEnsemble> {
    let (chi, gamma) = ensemble.mean_coefficients()?;
    let n = ensemble.retained_count();
    let sz0 = ensemble.iter_retained().map(|s| s.sz0).sum::<f64>() / n as f64;
    let mut h = SpinEnsemble::from_coefficients(n, chi, gamma)?;
    h.sz0_j.iter_mut().for_each(|s| *s = sz0);
    Ok(h)
}

/// Relative deviations of the signal and of the spin noise from the
/// homogenized ensemble, `(err_signal, err_spin_noise)`.
pub fn inhomogeneity_errors(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> Result<(f64, f64)> {
    ensure_non_negative("T", t)?;
    let h = homogenized(ensemble)?;
    let signal_h = signal_mean(t, &h, params);
    let noise_h = spin_noise(t, &h, params);
    if signal_h == 0.0 || noise_h == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let err_signal = (signal_mean(t, ensemble, params) / signal_h - 1.0).abs();
    let err_noise = (spin_noise(t, ensemble, params) / noise_h - 1.0).abs();
    Ok((err_signal, err_noise))
}
