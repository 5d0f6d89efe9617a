use serde::{Deserialize, Serialize};

use super::{differential_signal_slope, equator_spin_noise, shot_noise};
use crate::error::{ensure_positive, Error, Result};
use crate::model::{SpinEnsemble, SystemParams};
use crate::numeric::{equator_bracket, log_golden_section_min, one_minus_decay};

/// Ramsey signal-to-noise ratio for an infinitesimal tilt `theta -> 0`.
///
/// Noise is that of the untilted (equator) state; the reference record is
/// assumed calibrated.
pub fn snr(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::UndefinedSnr);
    }
    let slope = differential_signal_slope(t, ensemble, params);
    let noise = equator_spin_noise(t, ensemble, params) + shot_noise(t, params);
    Ok(slope.abs() / noise.sqrt())
}

/// `SNR / sqrt(N)` for homogeneous parameters as a function of `gamma T`:
/// `(1 - e^{-x}) / sqrt((1 - e^{-x})(3 + e^{-x}) - 4 x e^{-x} + x / lambda)`.
pub fn homogeneous_snr(gamma_t: f64, lambda: f64) -> f64 {
    if gamma_t <= 0.0 {
        return 0.0;
    }
    let denom = if lambda.is_infinite() {
        equator_bracket(gamma_t)
    } else {
        equator_bracket(gamma_t) + gamma_t / lambda
    };
    one_minus_decay(gamma_t) / denom.sqrt()
}

/// Optimal collection time for the homogeneous SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrOptimum {
    /// `sqrt(3 / (2 lambda))`.
    pub approx_gamma_t: f64,
    /// `1 - sqrt(2 / (3 lambda))`.
    pub approx_snr: f64,
    /// Numerical maximizer of [`homogeneous_snr`].
    pub gamma_t: f64,
    pub snr: f64,
}

pub fn snr_optimum(lambda: f64) -> Result<SnrOptimum> {
    ensure_positive("lambda", lambda)?;
    let approx_gamma_t = (1.5 / lambda).sqrt();
    // The maximizer sits near the approximation for large lambda and near
    // gamma T ~ 1 for small lambda; bracket generously around both.
    let lo = (approx_gamma_t * 1e-3).min(1e-3);
    let hi = (approx_gamma_t * 1e2).max(50.0);
    let (gamma_t, neg) = log_golden_section_min(|x| -homogeneous_snr(x, lambda), lo, hi, 1e-12);
    Ok(SnrOptimum {
        approx_gamma_t,
        approx_snr: 1.0 - (2.0 / (3.0 * lambda)).sqrt(),
        gamma_t,
        snr: -neg,
    })
}
