use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{measurement_quality, SystemParams};
use crate::numeric::one_minus_decay;
use crate::oracle::{oat_moments, oat_state, OAT_MAX_SPINS};

/// Which principal axis of a one-axis-twisted state is rotated onto `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeAxis {
    Squeezed,
    AntiSqueezed,
}

/// Entanglement of the initial state, given either directly as a Wineland
/// parameter or as a one-axis-twisting time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SqueezingSpec {
    Xi2 { xi2: f64 },
    Oat { t_sqz: f64, axis: SqueezeAxis },
}

impl SqueezingSpec {
    /// Weak-squeezing Wineland parameter `4 <S_z^2> / N`.
    ///
    /// Twisting times are converted with the exact symmetric-subspace state
    /// for `N <= 64` and with the closed-form principal variances otherwise.
    pub fn xi2(&self, n_spins: usize) -> Result<f64> {
        match *self {
            SqueezingSpec::Xi2 { xi2 } => {
                ensure_positive("xi2", xi2)?;
                Ok(xi2)
            }
            SqueezingSpec::Oat { t_sqz, axis } => {
                ensure_non_negative("t_sqz", t_sqz)?;
                if n_spins == 0 {
                    return Err(Error::invalid("n_spins", "must be at least 1"));
                }
                let n = n_spins as f64;
                let variance = if n_spins <= OAT_MAX_SPINS {
                    let m = oat_moments(&oat_state(n_spins, t_sqz, 0.0)?);
                    match axis {
                        SqueezeAxis::Squeezed => m.v_minus,
                        SqueezeAxis::AntiSqueezed => m.v_plus,
                    }
                } else {
                    let (v_plus, v_minus) = oat_variance_bounds(n_spins, t_sqz);
                    match axis {
                        SqueezeAxis::Squeezed => v_minus,
                        SqueezeAxis::AntiSqueezed => v_plus,
                    }
                };
                Ok(4.0 * variance / n)
            }
        }
    }
}

/// `-10 log10(xi2)`.
pub fn xi2_to_db(xi2: f64) -> f64 {
    // adding zero turns -0 into 0
    -10.0 * xi2.log10() + 0.0
}

/// Closed-form principal variances `(V+, V-)` of the one-axis-twisted
/// coherent state with Hamiltonian `S_z^2 / N` applied for time `t_sqz`.
pub fn oat_variance_bounds(n_spins: usize, t_sqz: f64) -> (f64, f64) {
    let n = n_spins as f64;
    let mu = t_sqz / n;
    // cos^k(y) evaluated as exp(k ln cos y) with ln cos y = ln1p(-2 sin^2(y/2))
    let ln_cos = |y: f64| (-2.0 * (0.5 * y).sin().powi(2)).ln_1p();
    let a = -((n - 2.0) * ln_cos(2.0 * mu)).exp_m1();
    let b2 = 16.0 * mu.sin().powi(2) * ((2.0 * n - 4.0) * ln_cos(mu)).exp();
    let root = (a * a + b2).sqrt();
    let scale = n * (n - 1.0) / 16.0;
    (n / 4.0 + scale * (a + root), n / 4.0 + scale * (a - root))
}

/// Change in measurement variance from initial squeezing,
/// `(lambda/gamma)(xi2 - 1)(1 - e^{-gamma T})^2`.
pub fn squeezing_delta(t: f64, xi2: f64, lambda: f64, gamma: f64) -> f64 {
    let a = one_minus_decay(gamma * t);
    lambda / gamma * (xi2 - 1.0) * a * a
}

/// Long-time limit of the homogeneous spin noise,
/// `48 n_bar N chi^2 / (kappa gamma^2) = 3 lambda / gamma`.
pub fn saturation_limit(params: &SystemParams, chi: f64, gamma: f64) -> Result<f64> {
    let lambda = measurement_quality(params, chi, gamma)?;
    Ok(3.0 * lambda / gamma)
}
