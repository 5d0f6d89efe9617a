//! Exact one-axis twisting in the symmetric (Dicke) subspace.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trajectory::JointZSampler;
use crate::analytic::SqueezeAxis;
use crate::error::{ensure_finite, ensure_non_negative, Error, Result};
use crate::numeric::golden_section_min;

/// Largest ensemble handled by the exact symmetric-subspace calculus.
pub const OAT_MAX_SPINS: usize = 64;

/// A state `exp(-i theta_x S_x) exp(-i t_sqz S_z^2 / N) |+x>` in the Dicke
/// basis, indexed by `k = m + N/2` for `S_z = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OatState {
    pub n_spins: usize,
    pub t_sqz: f64,
    pub theta_x: f64,
    pub amplitudes: Vec<Complex<f64>>,
}

impl OatState {
    /// `S_z` eigenvalue of basis index `k`.
    pub fn magnetization(&self, k: usize) -> f64 {
        k as f64 - 0.5 * self.n_spins as f64
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probabilities of each `S_z` level.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn vector(&self) -> DVector<Complex<f64>> {
        DVector::from_column_slice(&self.amplitudes)
    }
}

/// `S_x` in the Dicke basis of `n` spins.
fn sx_matrix(n: usize) -> DMatrix<f64> {
    let s = 0.5 * n as f64;
    let mut sx = DMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        let m = k as f64 - s;
        let v = 0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt();
        sx[(k + 1, k)] = v;
        sx[(k, k + 1)] = v;
    }
    sx
}

/// `S_y` is `-i` times the antisymmetric part of the ladder operators.
fn sy_matrix(n: usize) -> DMatrix<Complex<f64>> {
    let s = 0.5 * n as f64;
    let mut sy = DMatrix::from_element(n + 1, n + 1, Complex::new(0.0, 0.0));
    for k in 0..n {
        let m = k as f64 - s;
        let v = 0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt();
        // <k+1|S_y|k> = -i v, <k|S_y|k+1> = i v
        sy[(k + 1, k)] = Complex::new(0.0, -v);
        sy[(k, k + 1)] = Complex::new(0.0, v);
    }
    sy
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Builds the twisted and rotated state by exact diagonalization of `S_x`.
pub fn oat_state(n_spins: usize, t_sqz: f64, theta_x: f64) -> Result<OatState> {
    if n_spins == 0 {
        return Err(Error::invalid("n_spins", "must be at least 1"));
    }
    if n_spins > OAT_MAX_SPINS {
        return Err(Error::SizeLimit { n_spins, max: OAT_MAX_SPINS });
    }
    ensure_non_negative("t_sqz", t_sqz)?;
    ensure_finite("theta_x", theta_x)?;
    let n = n_spins as f64;
    let s = 0.5 * n;
    let half_ln2 = 0.5 * n * std::f64::consts::LN_2;
    // |+x> has binomial weights; the twist adds a phase -t m^2 / N
    let psi: DVector<Complex<f64>> = DVector::from_iterator(
        n_spins + 1,
        (0..=n_spins).map(|k| {
            let m = k as f64 - s;
            let mag = (0.5 * ln_binomial(n_spins, k) - half_ln2).exp();
            Complex::from_polar(mag, -t_sqz * m * m / n)
        }),
    );
    let psi = if theta_x == 0.0 {
        psi
    } else {
        let eig = SymmetricEigen::new(sx_matrix(n_spins));
        let v = eig.eigenvectors.map(|x| Complex::new(x, 0.0));
        let phases = DVector::from_iterator(
            n_spins + 1,
            eig.eigenvalues.iter().map(|&d| Complex::from_polar(1.0, -theta_x * d)),
        );
        let coeffs = v.adjoint() * psi;
        v * coeffs.component_mul(&phases)
    };
    Ok(OatState {
        n_spins,
        t_sqz,
        theta_x,
        amplitudes: psi.iter().copied().collect(),
    })
}

/// Second moments of an [`OatState`] and the squeezing figures derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OatMoments {
    /// Largest `S_z` variance reachable by a further rotation about `x`.
    pub v_plus: f64,
    /// Smallest `S_z` variance reachable by a further rotation about `x`.
    pub v_minus: f64,
    /// Additional rotation about `x` that brings `V-` onto `z`.
    pub theta_squeezed: f64,
    /// Additional rotation about `x` that brings `V+` onto `z`.
    pub theta_anti_squeezed: f64,
    /// `<S_x>`.
    pub contrast: f64,
    /// `4 V- / N`.
    pub xi2_sq: f64,
    /// `4 V+ / N`.
    pub xi2_antisq: f64,
    /// `N V- / <S_x>^2`.
    pub wineland_sq: f64,
    /// `N V+ / <S_x>^2`.
    pub wineland_antisq: f64,
}

fn expectation(psi: &DVector<Complex<f64>>, op: &DMatrix<Complex<f64>>) -> Complex<f64> {
    psi.dotc(&(op * psi))
}

/// Exact `S_z` variance extrema over rotations about `x`.
pub fn oat_moments(state: &OatState) -> OatMoments {
    let n = state.n_spins;
    let psi = state.vector();
    let sx = sx_matrix(n).map(|x| Complex::new(x, 0.0));
    let sy = sy_matrix(n);
    let sz = DMatrix::from_diagonal(&DVector::from_iterator(
        n + 1,
        (0..=n).map(|k| Complex::new(state.magnetization(k), 0.0)),
    ));
    let mean_y = expectation(&psi, &sy).re;
    let mean_z = expectation(&psi, &sz).re;
    let var_y = expectation(&psi, &(&sy * &sy)).re - mean_y * mean_y;
    let var_z = expectation(&psi, &(&sz * &sz)).re - mean_z * mean_z;
    let cov_yz = 0.5 * expectation(&psi, &(&sy * &sz + &sz * &sy)).re - mean_y * mean_z;
    let contrast = expectation(&psi, &sx).re;

    // rotating by theta about x maps S_z to cos S_z + sin S_y
    let rotated = |theta: f64| {
        let (s, c) = theta.sin_cos();
        c * c * var_z + s * s * var_y + 2.0 * s * c * cov_yz
    };
    let theta_squeezed = periodic_argmin(rotated);
    let theta_anti_squeezed = periodic_argmin(|t| -rotated(t));
    let v_minus = rotated(theta_squeezed);
    let v_plus = rotated(theta_anti_squeezed);
    let nf = n as f64;
    OatMoments {
        v_plus,
        v_minus,
        theta_squeezed,
        theta_anti_squeezed,
        contrast,
        xi2_sq: 4.0 * v_minus / nf,
        xi2_antisq: 4.0 * v_plus / nf,
        wineland_sq: nf * v_minus / (contrast * contrast),
        wineland_antisq: nf * v_plus / (contrast * contrast),
    }
}

/// Minimizer over `[0, pi)` of a pi-periodic function with one well.
fn periodic_argmin<F: Fn(f64) -> f64>(f: F) -> f64 {
    const COARSE: usize = 64;
    let step = std::f64::consts::PI / COARSE as f64;
    let best = (0..COARSE)
        .min_by(|&a, &b| f(a as f64 * step).total_cmp(&f(b as f64 * step)))
        .unwrap_or(0);
    let centre = best as f64 * step;
    let (theta, _) = golden_section_min(&f, centre - step, centre + step, 1e-14);
    theta.rem_euclid(std::f64::consts::PI)
}

/// Twisted state rotated so that the requested principal axis lies along `z`.
pub fn oat_aligned_state(n_spins: usize, t_sqz: f64, axis: SqueezeAxis) -> Result<OatState> {
    let m = oat_moments(&oat_state(n_spins, t_sqz, 0.0)?);
    let theta = match axis {
        SqueezeAxis::Squeezed => m.theta_squeezed,
        SqueezeAxis::AntiSqueezed => m.theta_anti_squeezed,
    };
    oat_state(n_spins, t_sqz, theta)
}

/// Samples spin-resolved `z` configurations from the exact `S_z`
/// distribution of a symmetric state.
#[derive(Debug, Clone)]
pub struct OatZSampler {
    n_spins: usize,
    /// Cumulative level probabilities.
    cdf: Vec<f64>,
    seed: u64,
}

/// Sampler drawing `S_z = m` from the level populations and then a uniformly
/// random set of `N/2 + m` up spins.
pub fn joint_z_sampler_from_oat(state: &OatState, seed: u64) -> OatZSampler {
    let mut acc = 0.0;
    let cdf = state
        .populations()
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    OatZSampler {
        n_spins: state.n_spins,
        cdf,
        seed,
    }
}

impl OatZSampler {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws into `up` with its own stream for draw index `index`.
    pub fn draw_indexed(&self, index: u64, up: &mut [bool]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        self.sample(&mut rng, up);
    }
}

impl JointZSampler for OatZSampler {
    fn n_spins(&self) -> usize {
        self.n_spins
    }

    fn z_moments(&self) -> (f64, f64) {
        let n = self.n_spins as f64;
        let (mut s1, mut s2, mut prev) = (0.0, 0.0, 0.0);
        for (k, &c) in self.cdf.iter().enumerate() {
            let p = c - prev;
            prev = c;
            let m = k as f64 - 0.5 * n;
            s1 += p * m;
            s2 += p * m * m;
        }
        let pair = if self.n_spins > 1 { (s2 - 0.25 * n) / (n * (n - 1.0)) } else { 0.0 };
        (s1 / n, pair)
    }

    fn sample(&self, rng: &mut dyn rand::RngCore, up: &mut [bool]) {
        assert_eq!(up.len(), self.n_spins, "sampler built for a different ensemble size");
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u: f64 = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u).min(self.n_spins);
        up.iter_mut().enumerate().for_each(|(j, s)| *s = j < k);
        up.shuffle(rng);
    }
}
