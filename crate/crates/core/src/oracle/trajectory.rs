//! Classical sampling of the homodyne record.
//!
//! In the `z` sector each spin is a two-state Markov chain: an up spin flips
//! down once, after an exponential waiting time with rate `gamma_j`, and
//! never returns. The time integral of a trajectory is therefore known
//! exactly from the flip time, and time-integrated white shot noise is a
//! single Gaussian draw.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    integrated_sz, record_gain, same_spin_integral, shot_noise, two_time_corr, variance_curve,
    SqueezingSpec,
};
use crate::error::{ensure_non_negative, Error, Result};
use crate::model::{SpinEnsemble, SystemParams};
use crate::numeric::decay_integral_ratio;

use super::oat::{joint_z_sampler_from_oat, oat_aligned_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub include_shot_noise: bool,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        Ok(())
    }

    /// Independent generator for trajectory `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// An analytic prediction next to a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub analytic_value: f64,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    /// `|analytic - estimate| / stderr`; zero when both vanish.
    pub n_sigma: f64,
}

impl OracleReport {
    pub fn new(analytic_value: f64, mc_estimate: f64, mc_stderr: f64) -> Self {
        let diff = (analytic_value - mc_estimate).abs();
        let n_sigma = if diff == 0.0 { 0.0 } else { diff / mc_stderr };
        OracleReport {
            analytic_value,
            mc_estimate,
            mc_stderr,
            n_sigma,
        }
    }

    pub fn within(&self, n_sigma: f64) -> bool {
        self.n_sigma <= n_sigma
    }
}

/// Mean and variance of the record at one collection time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordReports {
    pub mean: OracleReport,
    pub variance: OracleReport,
}

/// Draws correlated initial `z` configurations of the retained spins.
pub trait JointZSampler: Sync {
    fn n_spins(&self) -> usize;

    /// Fills `up[j]` with whether spin `j` starts in the excited state.
    fn sample(&self, rng: &mut dyn RngCore, up: &mut [bool]);

    /// `(<s_j^z>, <s_j^z s_j'^z>)` for `j != j'`, both identical across spins.
    fn z_moments(&self) -> (f64, f64);
}

/// `int_0^T s^z(t) dt` of one trajectory given its initial state and flip time.
#[inline]
pub fn integrated_z_path(up: bool, flip_time: f64, t: f64) -> f64 {
    if up {
        flip_time.min(t) - 0.5 * t
    } else {
        -0.5 * t
    }
}

/// Sample moments with standard errors of the mean and of the unbiased variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SampleStats {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

pub(crate) fn sample_stats<I>(values: I) -> SampleStats
where
    I: Iterator<Item = f64> + Clone,
{
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let (m2, m4) = values.fold((0.0, 0.0), |(a, b), v| {
        let d = (v - mean) * (v - mean);
        (a + d, b + d * d)
    });
    let variance = m2 / (n - 1.0);
    let m4 = m4 / n;
    let var_of_var = (m4 - (n - 3.0) / (n - 1.0) * variance * variance) / n;
    SampleStats {
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        variance_se: var_of_var.max(0.0).sqrt(),
    }
}

struct Retained {
    chi: Vec<f64>,
    gamma: Vec<f64>,
    sz0: Vec<f64>,
}

fn retained(ensemble: &SpinEnsemble) -> Result<Retained> {
    let mut r = Retained {
        chi: Vec::new(),
        gamma: Vec::new(),
        sz0: Vec::new(),
    };
    for s in ensemble.iter_retained() {
        r.chi.push(s.chi);
        r.gamma.push(s.gamma);
        r.sz0.push(s.sz0);
    }
    if r.chi.is_empty() {
        return Err(Error::AllSpinsDiscarded);
    }
    Ok(r)
}

/// Samples `n_traj` records at every time of `t_grid`; returns a flat
/// row-major `n_traj x t_grid.len()` matrix.
fn sample_records(
    spins: &Retained,
    t_grid: &[f64],
    cfg: &TrajectoryConfig,
    params: &SystemParams,
    sampler: Option<&dyn JointZSampler>,
) -> Vec<f64> {
    let k = t_grid.len();
    let gain = record_gain(params);
    let shot_sd: Vec<f64> = t_grid.iter().map(|&t| shot_noise(t, params).sqrt()).collect();
    let mut out = vec![0.0; cfg.n_traj * k];
    out.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
        let mut rng = cfg.rng(i);
        let mut up = vec![false; spins.chi.len()];
        match sampler {
            Some(s) => s.sample(&mut rng, &mut up),
            None => {
                for (u, &sz0) in up.iter_mut().zip(&spins.sz0) {
                    *u = rng.random::<f64>() < 0.5 + sz0;
                }
            }
        }
        row.fill(0.0);
        for j in 0..up.len() {
            let flip = if up[j] {
                let e: f64 = rng.sample(Exp1);
                e / spins.gamma[j]
            } else {
                f64::INFINITY
            };
            for (v, &t) in row.iter_mut().zip(t_grid) {
                *v += spins.chi[j] * integrated_z_path(up[j], flip, t);
            }
        }
        for (v, sd) in row.iter_mut().zip(&shot_sd) {
            *v *= gain;
            if cfg.include_shot_noise {
                let z: f64 = rng.sample(StandardNormal);
                *v += sd * z;
            }
        }
    });
    out
}

fn reports(
    samples: &[f64],
    k: usize,
    n_traj: usize,
    mean_analytic: &[f64],
    var_analytic: &[f64],
) -> Vec<RecordReports> {
    (0..k)
        .map(|c| {
            let column = (0..n_traj).map(move |i| samples[i * k + c]);
            let st = sample_stats(column);
            RecordReports {
                mean: OracleReport::new(mean_analytic[c], st.mean, st.mean_se),
                variance: OracleReport::new(var_analytic[c], st.variance, st.variance_se),
            }
        })
        .collect()
}

/// Analytic mean and spin variance for spins whose initial `z` values carry
/// the common moments `(m, c)` of a symmetric joint distribution.
fn symmetric_moments_prediction(spins: &Retained, t: f64, params: &SystemParams, m: f64, c: f64) -> (f64, f64) {
    let gain = record_gain(params);
    let mut mean = 0.0;
    let mut same = 0.0;
    let (mut sum_a, mut sum_a2) = (0.0, 0.0);
    for j in 0..spins.chi.len() {
        let (chi, gamma) = (spins.chi[j], spins.gamma[j]);
        mean += chi * integrated_sz(t, m, gamma);
        same += chi * chi * same_spin_integral(t, m, gamma);
        let a = chi * t * decay_integral_ratio(gamma * t);
        sum_a += a;
        sum_a2 += a * a;
    }
    let cross = (sum_a * sum_a - sum_a2) * (c - m * m);
    (gain * mean, gain * gain * (same + cross))
}

/// Monte Carlo estimate of the record mean and variance at time `t`.
///
/// Without a sampler the retained spins start independently with
/// `P(up) = 1/2 + sz0_j`. A sampler supplies correlated initial
/// configurations; the analytic prediction then uses its one- and two-point
/// moments.
pub fn classical_decay_oracle(
    ensemble: &SpinEnsemble,
    t: f64,
    cfg: &TrajectoryConfig,
    params: &SystemParams,
    sampler: Option<&dyn JointZSampler>,
) -> Result<RecordReports> {
    cfg.validate()?;
    params.validate()?;
    ensure_non_negative("T", t)?;
    let spins = retained(ensemble)?;
    let (mean, spin_var) = match sampler {
        Some(s) => {
            if s.n_spins() != spins.chi.len() {
                return Err(Error::invalid(
                    "sampler",
                    format!("draws {} spins but {} are retained", s.n_spins(), spins.chi.len()),
                ));
            }
            let (m, c) = s.z_moments();
            symmetric_moments_prediction(&spins, t, params, m, c)
        }
        None => {
            let gain = record_gain(params);
            let mut mean = 0.0;
            let mut var = 0.0;
            for j in 0..spins.chi.len() {
                let (chi, gamma, sz0) = (spins.chi[j], spins.gamma[j], spins.sz0[j]);
                mean += chi * integrated_sz(t, sz0, gamma);
                var += chi * chi * same_spin_integral(t, sz0, gamma);
            }
            (gain * mean, gain * gain * var)
        }
    };
    let var = spin_var + if cfg.include_shot_noise { shot_noise(t, params) } else { 0.0 };
    let samples = sample_records(&spins, &[t], cfg, params, sampler);
    Ok(reports(&samples, 1, cfg.n_traj, &[mean], &[var])[0])
}

/// Monte Carlo counterpart of [`variance_curve`]: one report pair per time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCurve {
    pub t_grid: Vec<f64>,
    pub mean: Vec<OracleReport>,
    pub variance: Vec<OracleReport>,
}

impl McCurve {
    pub fn max_n_sigma(&self) -> f64 {
        self.mean
            .iter()
            .chain(&self.variance)
            .map(|r| r.n_sigma)
            .fold(0.0, f64::max)
    }
}

/// Samples records along `t_grid` and compares them with the closed-form
/// curve. A twisting-time squeezing spec prepares the retained spins in the
/// exact aligned twisted state; a bare `xi2` has no state to sample from and
/// is rejected.
pub fn mc_variance_curve(
    t_grid: &[f64],
    ensemble: &SpinEnsemble,
    params: &SystemParams,
    cfg: &TrajectoryConfig,
    squeezing: Option<&SqueezingSpec>,
) -> Result<McCurve> {
    cfg.validate()?;
    let curve = variance_curve(t_grid, ensemble, params, squeezing)?;
    let spins = retained(ensemble)?;
    let state = match squeezing {
        None => None,
        Some(SqueezingSpec::Oat { t_sqz, axis }) => Some(oat_aligned_state(spins.chi.len(), *t_sqz, *axis)?),
        Some(SqueezingSpec::Xi2 { .. }) => {
            return Err(Error::invalid(
                "squeezing",
                "Monte Carlo sampling needs a twisting time, not a bare xi2",
            ))
        }
    };
    let sampler = state.as_ref().map(|s| joint_z_sampler_from_oat(s, cfg.seed));
    let samples = sample_records(
        &spins,
        t_grid,
        cfg,
        params,
        sampler.as_ref().map(|s| s as &dyn JointZSampler),
    );
    let analytic_var: Vec<f64> = (0..t_grid.len())
        .map(|i| {
            let spin = curve.spin_noise[i] + curve.squeezing_shift[i];
            if cfg.include_shot_noise {
                spin + curve.shot_noise[i]
            } else {
                spin
            }
        })
        .collect();
    let r = reports(&samples, t_grid.len(), cfg.n_traj, &curve.signal, &analytic_var);
    Ok(McCurve {
        t_grid: t_grid.to_vec(),
        mean: r.iter().map(|p| p.mean).collect(),
        variance: r.iter().map(|p| p.variance).collect(),
    })
}

/// Empirical same-spin correlator `<s_j^z(t) s_j^z(t')>` on `times x times`,
/// compared with the regression solution. Row-major over `(t, t')`.
pub fn empirical_two_time_corr(
    ensemble: &SpinEnsemble,
    j: usize,
    times: &[f64],
    cfg: &TrajectoryConfig,
) -> Result<Vec<OracleReport>> {
    cfg.validate()?;
    if j >= ensemble.len() {
        return Err(Error::invalid("j", format!("index {j} out of range")));
    }
    for &t in times {
        ensure_non_negative("t", t)?;
    }
    let (gamma, sz0) = (ensemble.gamma_j[j], ensemble.sz0_j[j]);
    let k = times.len();
    let mut products = vec![0.0; cfg.n_traj * k * k];
    products.par_chunks_mut(k * k).enumerate().for_each(|(i, row)| {
        let mut rng = cfg.rng(i);
        let up = rng.random::<f64>() < 0.5 + sz0;
        let flip = if up {
            let e: f64 = rng.sample(Exp1);
            e / gamma
        } else {
            f64::INFINITY
        };
        let z = |t: f64| if up && flip > t { 0.5 } else { -0.5 };
        for a in 0..k {
            for b in 0..k {
                row[a * k + b] = z(times[a]) * z(times[b]);
            }
        }
    });
    Ok((0..k * k)
        .map(|c| {
            let st = sample_stats((0..cfg.n_traj).map(|i| products[i * k * k + c]));
            let (a, b) = (c / k, c % k);
            let analytic = two_time_corr(times[a], times[b], j, j, ensemble, 0.0);
            OracleReport::new(analytic, st.mean, st.mean_se)
        })
        .collect())
}

/// Dispersive coupling for an `n_desk`-spin stand-in of an `n_full`-spin
/// ensemble with the same `N chi^2`.
pub fn desk_scale_chi(chi: f64, n_full: usize, n_desk: usize) -> f64 {
    chi * (n_full as f64 / n_desk as f64).sqrt()
}
