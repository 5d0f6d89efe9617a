use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::numeric::{equator_bracket, log_golden_section_min, one_minus_decay};

/// Rounded `gamma T` of the plain run-count optimum.
pub const NRUNS_APPROX_GAMMA_T: f64 = 2.1;

/// Runs needed before the sample variance resolves spin-projection noise
/// above shot noise, `(1 + gamma T / (lambda B(gamma T)))^2`.
pub fn nruns_threshold(t: f64, lambda: f64, gamma: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("gamma", gamma)?;
    ensure_non_negative("T", t)?;
    let x = gamma * t;
    if x == 0.0 {
        return Err(Error::DivergentThreshold("collection time is zero"));
    }
    let r = 1.0 + x / (lambda * equator_bracket(x));
    Ok(r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsOptimum {
    pub gamma_t: f64,
    pub nruns: f64,
    pub approx_gamma_t: f64,
    /// `(1 + 1.2 / lambda)^2`.
    pub approx_nruns: f64,
}

pub fn nruns_optimum(lambda: f64) -> Result<RunsOptimum> {
    ensure_positive("lambda", lambda)?;
    // x / B(x) carries all of the T dependence, so the minimizer does not move with lambda
    let (gamma_t, _) = log_golden_section_min(|x| x / equator_bracket(x), 1e-2, 50.0, 1e-12);
    Ok(RunsOptimum {
        gamma_t,
        nruns: nruns_threshold(gamma_t, lambda, 1.0)?,
        approx_gamma_t: NRUNS_APPROX_GAMMA_T,
        approx_nruns: (1.0 + 1.2 / lambda).powi(2),
    })
}

/// Runs needed to resolve the variance change of a squeezed or
/// anti-squeezed initial state.
pub fn nruns_squeezing(t: f64, lambda: f64, xi2: f64, gamma: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("gamma", gamma)?;
    ensure_positive("xi2", xi2)?;
    ensure_non_negative("T", t)?;
    if xi2 == 1.0 {
        return Err(Error::DivergentThreshold("separable state has no squeezing shift"));
    }
    let x = gamma * t;
    if x == 0.0 {
        return Err(Error::DivergentThreshold("collection time is zero"));
    }
    let a = one_minus_decay(x);
    let r = 1.0 + (equator_bracket(x) + x / lambda) / ((xi2 - 1.0) * a * a);
    Ok(r * r)
}

/// Optimal collection times for the squeezing run count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRunOptima {
    /// `2 sqrt(3) / sqrt(8 lambda + 5)`, from the short-time expansion.
    pub gamma_t_min: f64,
    /// Numerical minimizer of [`nruns_squeezing`].
    pub gamma_t_min_numeric: f64,
    pub nruns_at_min: f64,
    /// `1 / (1 + lambda xi2)`, minimizing `N_runs T`.
    pub gamma_t_min_total: f64,
    /// Numerical minimizer of `N_runs gamma T`.
    pub gamma_t_min_total_numeric: f64,
}

pub fn squeezing_run_optima(lambda: f64, xi2: f64) -> Result<SqueezingRunOptima> {
    nruns_squeezing(1.0, lambda, xi2, 1.0)?;
    let runs = |x: f64| nruns_squeezing(x, lambda, xi2, 1.0).unwrap_or(f64::INFINITY);
    let (numeric, nruns_at_min) = log_golden_section_min(runs, 1e-4, 20.0, 1e-12);
    let (total, _) = log_golden_section_min(|x| x * runs(x), 1e-5, 20.0, 1e-12);
    Ok(SqueezingRunOptima {
        gamma_t_min: 2.0 * 3f64.sqrt() / (8.0 * lambda + 5.0).sqrt(),
        gamma_t_min_numeric: numeric,
        nruns_at_min,
        gamma_t_min_total: 1.0 / (1.0 + lambda * xi2),
        gamma_t_min_total_numeric: total,
    })
}
