use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};

/// Minimum spin weight of the eigenvector identified as the spin branch.
pub const MIN_SPIN_WEIGHT: f64 = 0.75;

/// Frequency pull and total decay of the spin-like normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveShift {
    /// `delta - Re E` of the spin branch.
    pub shift: f64,
    /// `-2 Im E` of the spin branch.
    pub decay: f64,
    /// Weight of the bare spin in the branch eigenvector.
    pub spin_weight: f64,
}

/// Diagonalizes the single-excitation matrix
/// `[[Delta - i kappa/2, g], [g, delta - i gamma_-/2]]` and returns the
/// spin-like branch, chosen by eigenvector overlap with the bare spin.
pub fn dispersive_eigen_oracle(
    g: f64,
    delta_res: f64,
    delta_spin: f64,
    kappa: f64,
    gamma_minus: f64,
) -> Result<DispersiveShift> {
    ensure_finite("g", g)?;
    ensure_finite("delta_res", delta_res)?;
    ensure_finite("delta_spin", delta_spin)?;
    ensure_positive("kappa", kappa)?;
    ensure_non_negative("gamma_minus", gamma_minus)?;
    if g == 0.0 {
        return Ok(DispersiveShift {
            shift: 0.0,
            decay: gamma_minus,
            spin_weight: 1.0,
        });
    }
    let a = Complex::new(delta_res, -0.5 * kappa);
    let b = Complex::new(delta_spin, -0.5 * gamma_minus);
    let d = a - b;
    let g2 = Complex::new(g * g, 0.0);
    let mut disc = (d * d + 4.0 * g2).sqrt();
    if (d.conj() * disc).re < 0.0 {
        disc = -disc;
    }
    let sum = d + disc;
    if sum.norm() == 0.0 {
        return Err(Error::BranchAmbiguity {
            detuning: delta_res - delta_spin,
            coupling: g,
        });
    }
    // eigenvalues b + small and a + small, without cancellation
    let small = -2.0 * g2 / sum;
    let candidates = [(b + small, small), (a - small, -small)];
    let spin_weight = |e: Complex<f64>| {
        // right eigenvector (g, E - a)
        let v2 = (e - a).norm_sqr();
        v2 / (g * g + v2)
    };
    let (best, weight) = candidates
        .iter()
        .map(|&(e, s)| ((e, s), spin_weight(e)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("two candidates");
    if !(weight >= MIN_SPIN_WEIGHT) {
        return Err(Error::BranchAmbiguity {
            detuning: delta_res - delta_spin,
            coupling: g,
        });
    }
    let (e, offset) = best;
    let (shift, decay) = if e == b + small {
        (-offset.re, gamma_minus - 2.0 * offset.im)
    } else {
        (delta_spin - e.re, -2.0 * e.im)
    };
    Ok(DispersiveShift {
        shift,
        decay,
        spin_weight: weight,
    })
}

/// One point of a coupling-ratio sweep against the second-order coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    /// `g / (Delta - delta)`.
    pub ratio: f64,
    pub shift: f64,
    pub decay: f64,
    pub chi: f64,
    pub gamma: f64,
    pub shift_rel_err: f64,
    pub decay_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `ln(shift_rel_err)` against `ln(ratio)`.
    pub shift_slope: f64,
    pub decay_slope: f64,
}

/// Sweeps `g = ratio * detuning` at fixed `Delta - delta = detuning`.
pub fn eigen_convergence(
    ratios: &[f64],
    detuning: f64,
    kappa: f64,
    gamma_minus: f64,
) -> Result<ConvergenceReport> {
    let mut points = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let g = ratio * detuning;
        let r = dispersive_eigen_oracle(g, detuning, 0.0, kappa, gamma_minus)?;
        let chi = g * g / detuning;
        let gamma = gamma_minus + kappa * g * g / (detuning * detuning);
        points.push(ConvergencePoint {
            ratio,
            shift: r.shift,
            decay: r.decay,
            chi,
            gamma,
            shift_rel_err: ((r.shift - chi) / chi).abs(),
            decay_rel_err: ((r.decay - gamma) / gamma).abs(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.ratio.ln()).collect();
    let slope = |ys: Vec<f64>| log_slope(&xs, &ys);
    let shift_slope = slope(points.iter().map(|p| p.shift_rel_err.ln()).collect());
    let decay_slope = slope(points.iter().map(|p| p.decay_rel_err.ln()).collect());
    Ok(ConvergenceReport {
        points,
        shift_slope,
        decay_slope,
    })
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
