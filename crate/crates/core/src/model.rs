//! Physical parameters, per-spin dispersive coefficients and validity margins.
//!
//! Every frequency and rate stored here is an angular quantity in rad/s.
//! Conversion from cyclic Hz happens once, at the configuration boundary
//! (see [`crate::config`]).

use serde::{Deserialize, Serialize};

use crate::analytic::SqueezingSpec;
use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};

/// Reported in place of a margin whose defining ratio is unbounded
/// (for example any coupling-limited margin at `g = 0`).
pub const MARGIN_UNBOUNDED: f64 = f64::MAX;

/// Global device and drive parameters, angular units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_spins: usize,
    /// Homogeneous spin-resonator coupling.
    pub g: f64,
    /// Inhomogeneous broadening width.
    pub sigma_delta: f64,
    /// Intrinsic spin relaxation rate, `1/T1`.
    pub gamma_minus: f64,
    /// Resonator energy decay rate.
    pub kappa: f64,
    /// Resonator detuning from the spin center frequency.
    pub delta_res: f64,
    /// Mean intracavity photon number.
    pub n_bar: f64,
    /// Homodyne detection efficiency.
    pub eta: f64,
    /// Lorentzian phase-noise width.
    pub gamma_l: f64,
}

impl SystemParams {
    /// Reference NV-ensemble device: `N = 1e6`, `g = 2pi 50/s`,
    /// `sigma = 2pi 1 MHz`, `T1^-1 = 2pi/s`, `kappa = 2pi 100 kHz`,
    /// `Delta = 2pi 5 MHz`, `n_bar = 1e5`, ideal detection.
    pub fn reference() -> Self {
        let tau = std::f64::consts::TAU;
        SystemParams {
            n_spins: 1_000_000,
            g: tau * 50.0,
            sigma_delta: tau * 1e6,
            gamma_minus: tau * 1.0,
            kappa: tau * 1e5,
            delta_res: tau * 5e6,
            n_bar: 1e5,
            eta: 1.0,
            gamma_l: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::invalid("n_spins", "must be at least 1"));
        }
        ensure_finite("g", self.g)?;
        ensure_non_negative("sigma_delta", self.sigma_delta)?;
        ensure_non_negative("gamma_minus", self.gamma_minus)?;
        ensure_positive("kappa", self.kappa)?;
        ensure_finite("delta_res", self.delta_res)?;
        ensure_non_negative("n_bar", self.n_bar)?;
        ensure_non_negative("gamma_L", self.gamma_l)?;
        ensure_finite("eta", self.eta)?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        Ok(())
    }

    /// Discard threshold `g sqrt(n_bar)` for a spin with coupling `g_j`.
    #[inline]
    pub fn discard_threshold(&self, g_j: f64) -> f64 {
        g_j.abs() * self.n_bar.sqrt()
    }

    /// Dispersive coupling of a spin at the band center, `g^2 / Delta`.
    pub fn homogeneous_chi(&self) -> f64 {
        self.g * self.g / self.delta_res
    }

    /// Total decay of a spin at the band center, `gamma_- + kappa g^2 / Delta^2`.
    /// Falls back to the intrinsic rate when `Delta = 0`.
    pub fn homogeneous_gamma(&self) -> f64 {
        if self.delta_res == 0.0 {
            self.gamma_minus
        } else {
            self.gamma_minus + self.kappa * self.g * self.g / (self.delta_res * self.delta_res)
        }
    }

    /// Shot-noise inflation from resonator phase noise, `1 + 32 Gamma_L n_bar / kappa`.
    pub fn phase_noise_factor(&self) -> f64 {
        1.0 + 32.0 * self.gamma_l * self.n_bar / self.kappa
    }
}

/// Per-spin dispersive coefficients for one ensemble realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinEnsemble {
    pub delta_j: Vec<f64>,
    pub g_j: Vec<f64>,
    pub chi_j: Vec<f64>,
    pub gamma_j: Vec<f64>,
    pub sz0_j: Vec<f64>,
    pub retained: Vec<bool>,
}

/// The coefficients of one retained spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetainedSpin {
    pub chi: f64,
    pub gamma: f64,
    pub sz0: f64,
}

impl SpinEnsemble {
    /// Derives `chi_j`, `gamma_j` and the retention mask without requiring any
    /// spin to survive the discard rule.
    pub fn derive(params: &SystemParams, delta_j: &[f64], g_j: &[f64]) -> Result<Self> {
        params.validate()?;
        if delta_j.len() != g_j.len() {
            return Err(Error::invalid(
                "g_j",
                format!("length {} does not match delta_j length {}", g_j.len(), delta_j.len()),
            ));
        }
        let n = delta_j.len();
        let mut ensemble = SpinEnsemble {
            delta_j: delta_j.to_vec(),
            g_j: g_j.to_vec(),
            chi_j: Vec::with_capacity(n),
            gamma_j: Vec::with_capacity(n),
            sz0_j: vec![0.0; n],
            retained: Vec::with_capacity(n),
        };
        for (&d, &g) in delta_j.iter().zip(g_j) {
            ensure_finite("delta_j", d)?;
            ensure_finite("g_j", g)?;
            let detuning = params.delta_res - d;
            let g2 = g * g;
            ensemble.chi_j.push(g2 / detuning);
            ensemble
                .gamma_j
                .push(params.gamma_minus + params.kappa * g2 / (detuning * detuning));
            ensemble
                .retained
                .push(detuning.abs() > params.discard_threshold(g));
        }
        Ok(ensemble)
    }

    /// `N` spins at the band center with the homogeneous coupling `params.g`.
    pub fn homogeneous(params: &SystemParams, n: usize) -> Result<Self> {
        derive_couplings(params, &vec![0.0; n], &vec![params.g; n])
    }

    /// A homogeneous ensemble with explicitly given coefficients, bypassing the
    /// coupling derivation. Used for desk-scale oracle runs where `chi` is
    /// rescaled to hold `lambda` fixed at small `N`.
    pub fn from_coefficients(n: usize, chi: f64, gamma: f64) -> Result<Self> {
        ensure_finite("chi", chi)?;
        ensure_non_negative("gamma", gamma)?;
        if n == 0 {
            return Err(Error::AllSpinsDiscarded);
        }
        Ok(SpinEnsemble {
            delta_j: vec![0.0; n],
            g_j: vec![0.0; n],
            chi_j: vec![chi; n],
            gamma_j: vec![gamma; n],
            sz0_j: vec![0.0; n],
            retained: vec![true; n],
        })
    }

    pub fn len(&self) -> usize {
        self.delta_j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_j.is_empty()
    }

    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    pub fn retained_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.retained_count() as f64 / self.len() as f64
        }
    }

    pub fn iter_retained(&self) -> impl Iterator<Item = RetainedSpin> + '_ {
        (0..self.len()).filter(move |&j| self.retained[j]).map(move |j| RetainedSpin {
            chi: self.chi_j[j],
            gamma: self.gamma_j[j],
            sz0: self.sz0_j[j],
        })
    }

    /// `(chi_bar, gamma_bar)` averaged over retained spins.
    pub fn mean_coefficients(&self) -> Result<(f64, f64)> {
        let n = self.retained_count();
        if n == 0 {
            return Err(Error::AllSpinsDiscarded);
        }
        let (sc, sg) = self
            .iter_retained()
            .fold((0.0, 0.0), |(c, g), s| (c + s.chi, g + s.gamma));
        Ok((sc / n as f64, sg / n as f64))
    }

    /// True if all retained spins share one `chi` and one `gamma`.
    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.iter_retained();
        match it.next() {
            None => true,
            Some(first) => it.all(|s| s.chi == first.chi && s.gamma == first.gamma),
        }
    }

    /// Sets every initial polarization from an initial-state description.
    pub fn with_initial_state(mut self, state: &InitialState) -> Self {
        let sz0 = state.polarization();
        self.sz0_j.iter_mut().for_each(|s| *s = sz0);
        self
    }

    /// Measurement quality of the homogenized ensemble
    /// (`chi_bar`, `gamma_bar`, `N` = retained count).
    pub fn homogenized_lambda(&self, params: &SystemParams) -> Result<f64> {
        let (chi, gamma) = self.mean_coefficients()?;
        let mut p = *params;
        p.n_spins = self.retained_count();
        measurement_quality(&p, chi, gamma)
    }
}

/// Derives `chi_j = g_j^2/(Delta - delta_j)` and
/// `gamma_j = gamma_- + kappa g_j^2/(Delta - delta_j)^2`, then applies the
/// discard rule `|Delta - delta_j| > g_j sqrt(n_bar)`.
pub fn derive_couplings(params: &SystemParams, delta_j: &[f64], g_j: &[f64]) -> Result<SpinEnsemble> {
    let ensemble = SpinEnsemble::derive(params, delta_j, g_j)?;
    if ensemble.retained_count() == 0 {
        return Err(Error::AllSpinsDiscarded);
    }
    Ok(ensemble)
}

/// Measurement-quality parameter `lambda = 16 chi^2 n_bar N / (kappa gamma)`.
pub fn measurement_quality(params: &SystemParams, chi: f64, gamma: f64) -> Result<f64> {
    ensure_positive("kappa", params.kappa)?;
    ensure_positive("gamma", gamma)?;
    ensure_finite("chi", chi)?;
    Ok(16.0 * chi * chi * params.n_bar * params.n_spins as f64 / (params.kappa * gamma))
}

/// `lambda` degraded by detection efficiency and Lorentzian phase noise.
pub fn effective_lambda(lambda: f64, params: &SystemParams) -> Result<f64> {
    ensure_non_negative("lambda", lambda)?;
    params.validate()?;
    Ok(lambda * params.eta / params.phase_noise_factor())
}

/// Collective and inhomogeneous cooperativities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cooperativities {
    /// `4 N g^2 / (kappa gamma)`.
    pub collective: f64,
    /// `n_bar g^2 / sigma^2`.
    pub inhomogeneous: f64,
    /// `4 C min(1, C_inh)`.
    pub lambda_max: f64,
}

pub fn cooperativities(params: &SystemParams) -> Result<Cooperativities> {
    params.validate()?;
    ensure_positive("sigma_delta", params.sigma_delta)?;
    let gamma = params.homogeneous_gamma();
    ensure_positive("gamma", gamma)?;
    let g2 = params.g * params.g;
    let collective = 4.0 * params.n_spins as f64 * g2 / (params.kappa * gamma);
    let inhomogeneous = params.n_bar * g2 / (params.sigma_delta * params.sigma_delta);
    Ok(Cooperativities {
        collective,
        inhomogeneous,
        lambda_max: 4.0 * collective * inhomogeneous.min(1.0),
    })
}

/// Margins of the approximations behind the dispersive readout model.
/// Each margin is a ratio that should be much larger than one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `min_j |Delta - delta_j| / (g_j sqrt(n_bar))` over retained spins
    /// (over all spins if none is retained).
    pub dispersive_margin: f64,
    /// `kappa / max_j max(gamma_j, |chi_j|)`.
    pub fast_cavity_margin: f64,
    /// `|Delta| sigma / g^2`: resonator-mediated flip-flops.
    pub flipflop_margin: f64,
    /// `Delta^2 sigma / (kappa g^2)`: superradiant Purcell enhancement.
    pub superradiance_margin: f64,
    pub retained_fraction: f64,
}

impl RegimeReport {
    pub fn margins(&self) -> [(&'static str, f64); 4] {
        [
            ("dispersive_margin", self.dispersive_margin),
            ("fast_cavity_margin", self.fast_cavity_margin),
            ("flipflop_margin", self.flipflop_margin),
            ("superradiance_margin", self.superradiance_margin),
        ]
    }

    pub fn all_above(&self, threshold: f64) -> bool {
        self.margins().iter().all(|&(_, m)| m > threshold)
    }
}

fn bounded_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        MARGIN_UNBOUNDED
    } else {
        (num / den).min(MARGIN_UNBOUNDED)
    }
}

pub fn check_regime(params: &SystemParams, ensemble: &SpinEnsemble) -> RegimeReport {
    let any_retained = ensemble.retained.iter().any(|&r| r);
    let mut dispersive = MARGIN_UNBOUNDED;
    let mut fastest = 0.0f64;
    for j in 0..ensemble.len() {
        if any_retained && !ensemble.retained[j] {
            continue;
        }
        let detuning = (params.delta_res - ensemble.delta_j[j]).abs();
        dispersive = dispersive.min(bounded_ratio(detuning, params.discard_threshold(ensemble.g_j[j])));
        if ensemble.retained[j] {
            fastest = fastest.max(ensemble.gamma_j[j]).max(ensemble.chi_j[j].abs());
        }
    }
    let g2 = params.g * params.g;
    RegimeReport {
        dispersive_margin: dispersive,
        fast_cavity_margin: bounded_ratio(params.kappa, fastest),
        flipflop_margin: bounded_ratio(params.delta_res.abs() * params.sigma_delta, g2),
        superradiance_margin: bounded_ratio(
            params.delta_res * params.delta_res * params.sigma_delta,
            params.kappa * g2,
        ),
        retained_fraction: ensemble.retained_fraction(),
    }
}

/// Initial state of the ensemble before readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    /// Product state on the Bloch-sphere equator, `<s_z> = 0`.
    Equator,
    /// Product state rotated off the equator by `theta`, `<s_z> = sin(theta)/2`.
    Tilted { theta: f64 },
    /// Collective squeezed state along the equator.
    Squeezed(SqueezingSpec),
}

impl InitialState {
    pub fn polarization(&self) -> f64 {
        match self {
            InitialState::Equator | InitialState::Squeezed(_) => 0.0,
            InitialState::Tilted { theta } => 0.5 * theta.sin(),
        }
    }
}
