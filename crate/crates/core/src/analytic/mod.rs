//! Closed-form readout theory.
//!
//! Spin populations relax at the per-spin rate `gamma_j` toward the ground
//! state; the homodyne record integrates `sum_j chi_j s_j^z(t)` on top of white
//! shot noise. Everything here is a closed form in `x = gamma_j T`.

mod curve;
mod runs;
mod snr;
mod squeezing;

pub use curve::{variance_curve, CurveWarning, MeasurementCurve};
pub use runs::{
    nruns_optimum, nruns_squeezing, nruns_threshold, squeezing_run_optima, RunsOptimum,
    SqueezingRunOptima, NRUNS_APPROX_GAMMA_T,
};
pub use snr::{homogeneous_snr, snr, snr_optimum, SnrOptimum};
pub use squeezing::{
    oat_variance_bounds, saturation_limit, squeezing_delta, xi2_to_db, SqueezeAxis, SqueezingSpec,
};

use crate::model::{SpinEnsemble, SystemParams};
use crate::numeric::{correlator_kernel, decay, decay_integral_ratio, one_minus_decay};

/// Prefactor `8 sqrt(eta n_bar / kappa)` converting `sum_j chi_j int s_j^z dt`
/// into the homodyne record.
#[inline]
pub fn record_gain(params: &SystemParams) -> f64 {
    8.0 * (params.eta * params.n_bar / params.kappa).sqrt()
}

/// `<s_z(t)> = -1/2 + e^{-gamma t} (1 + 2 sz0) / 2`.
pub fn sz_mean(t: f64, sz0: f64, gamma: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let x = gamma * t;
    sz0 * decay(x) - 0.5 * one_minus_decay(x)
}

/// `int_0^T <s_z(t)> dt = (sz0 + 1/2)(1 - e^{-gamma T})/gamma - T/2`,
/// continuous through `gamma = 0` where it equals `sz0 T`.
pub fn integrated_sz(t: f64, sz0: f64, gamma: f64) -> f64 {
    debug_assert!(t >= 0.0);
    t * ((sz0 + 0.5) * decay_integral_ratio(gamma * t) - 0.5)
}

/// Mean homodyne record `<M(T)>`, summed over retained spins.
pub fn signal_mean(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> f64 {
    let sum: f64 = ensemble
        .iter_retained()
        .map(|s| s.chi * integrated_sz(t, s.sz0, s.gamma))
        .sum();
    record_gain(params) * sum
}

/// `d<M_signal(T)>/d theta` at `theta = 0` for the tilt `sz0 = sin(theta)/2`.
pub fn differential_signal_slope(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> f64 {
    let sum: f64 = ensemble
        .iter_retained()
        .map(|s| s.chi * 0.5 * t * decay_integral_ratio(s.gamma * t))
        .sum();
    record_gain(params) * sum
}

/// Connected double integral of the same-spin correlator,
/// `p/gamma^2 [2(1-e^{-x}) - 2 x e^{-x} - p (1-e^{-x})^2]` with `p = sz0 + 1/2`.
pub(crate) fn same_spin_integral(t: f64, sz0: f64, gamma: f64) -> f64 {
    let x = gamma * t;
    let p = sz0 + 0.5;
    let a = decay_integral_ratio(x);
    t * t * p * (correlator_kernel(x) - p * a * a)
}

/// Spin-projection noise `(Delta M_spin(T))^2` of a separable initial state,
/// including the detection-efficiency factor.
pub fn spin_noise(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> f64 {
    let sum: f64 = ensemble
        .iter_retained()
        .map(|s| s.chi * s.chi * same_spin_integral(t, s.sz0, s.gamma))
        .sum();
    64.0 * params.eta * params.n_bar / params.kappa * sum
}

/// Spin noise evaluated with every spin on the equator, whatever `sz0_j` holds.
pub(crate) fn equator_spin_noise(t: f64, ensemble: &SpinEnsemble, params: &SystemParams) -> f64 {
    let sum: f64 = ensemble
        .iter_retained()
        .map(|s| s.chi * s.chi * same_spin_integral(t, 0.0, s.gamma))
        .sum();
    64.0 * params.eta * params.n_bar / params.kappa * sum
}

/// Integrated shot noise `T (1 + 32 Gamma_L n_bar / kappa)`.
pub fn shot_noise(t: f64, params: &SystemParams) -> f64 {
    t * params.phase_noise_factor()
}

/// Two-time correlator `<s_j^z(t) s_j'^z(t')>` from the regression solution.
///
/// `init_corr` is `<s_j^z s_j'^z>` at `t = 0`; it is ignored for `j == j'`
/// where the equal-time value is always 1/4.
pub fn two_time_corr(
    t: f64,
    t_prime: f64,
    j: usize,
    j_prime: usize,
    ensemble: &SpinEnsemble,
    init_corr: f64,
) -> f64 {
    let (t, t_prime, j, j_prime) = if t > t_prime {
        (t_prime, t, j_prime, j)
    } else {
        (t, t_prime, j, j_prime)
    };
    let (g1, s1) = (ensemble.gamma_j[j], ensemble.sz0_j[j]);
    if j == j_prime {
        return 0.5 * (s1 + 0.5) * (decay(g1 * t_prime) - decay(g1 * t)) + 0.25;
    }
    let (g2, s2) = (ensemble.gamma_j[j_prime], ensemble.sz0_j[j_prime]);
    let e1 = decay(g1 * t);
    let e2 = decay(g2 * t_prime);
    e1 * e2 * init_corr - 0.5 * e1 * (1.0 - e2) * s1 - 0.5 * e2 * (1.0 - e1) * s2
        + 0.25 * (1.0 - e1) * (1.0 - e2)
}

/// Connected double integral
/// `int_0^T int_0^T [<s_j(t) s_j'(t')> - <s_j(t)><s_j'(t')>] dt dt'`.
pub fn integrated_two_point(
    t: f64,
    j: usize,
    j_prime: usize,
    ensemble: &SpinEnsemble,
    init_corr: f64,
) -> f64 {
    let (g1, s1) = (ensemble.gamma_j[j], ensemble.sz0_j[j]);
    if j == j_prime {
        return same_spin_integral(t, s1, g1);
    }
    let (g2, s2) = (ensemble.gamma_j[j_prime], ensemble.sz0_j[j_prime]);
    t * t * decay_integral_ratio(g1 * t) * decay_integral_ratio(g2 * t) * (init_corr - s1 * s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_couplings, measurement_quality};
    use std::f64::consts::LN_2;

    fn single(gamma: f64, sz0: f64) -> SpinEnsemble {
        let mut e = SpinEnsemble::from_coefficients(1, 1.0, gamma).unwrap();
        e.sz0_j[0] = sz0;
        e
    }

    #[test]
    fn sz_mean_cases() {
        assert_eq!(sz_mean(0.0, 0.3, 2.0), 0.3);
        assert!((sz_mean(LN_2, 0.0, 1.0) + 0.25).abs() < 1e-15);
        assert_eq!(sz_mean(1e6, 0.5, 1.0), -0.5);
    }

    #[test]
    fn integrated_sz_cases() {
        assert_eq!(integrated_sz(0.0, 0.2, 1.0), 0.0);
        for &t in &[0.1, 1.0, 17.0] {
            assert!((integrated_sz(t, -0.5, 3.0) + t / 2.0).abs() < 1e-14);
        }
        // (1/2)(1 - e^-1) - 1/2
        let expected = 0.5 * (1.0 - (-1.0f64).exp()) - 0.5;
        assert!((integrated_sz(1.0, 0.0, 1.0) - expected).abs() < 1e-15);
        assert!((integrated_sz(1.0, 0.0, 1.0) + 0.18394).abs() < 1e-5);
        // gamma = 0 limit
        assert_eq!(integrated_sz(2.0, 0.25, 0.0), 0.5);
    }

    #[test]
    fn stationary_spin_signal() {
        let p = SystemParams::reference();
        let e = single(p.gamma_minus, -0.5);
        let t = 0.7;
        let expected = -8.0 * (p.n_bar / p.kappa).sqrt() * t / 2.0;
        assert!((signal_mean(t, &e, &p) - expected).abs() < 1e-12 * expected.abs());
        assert_eq!(signal_mean(0.0, &e, &p), 0.0);
    }

    #[test]
    fn slope_long_time_limit() {
        let p = SystemParams::reference();
        let e = SpinEnsemble::homogeneous(&p, 10).unwrap();
        let (chi, gamma) = (e.chi_j[0], e.gamma_j[0]);
        let limit = 4.0 * (p.n_bar / p.kappa).sqrt() * 10.0 * chi / gamma;
        let s = differential_signal_slope(800.0 / gamma, &e, &p);
        assert!(((s - limit) / limit).abs() < 1e-14);
        assert_eq!(differential_signal_slope(0.0, &e, &p), 0.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let p = SystemParams::reference();
        let base = SpinEnsemble::homogeneous(&p, 5).unwrap();
        let h: f64 = 1e-6;
        let mut tilted = base.clone();
        tilted.sz0_j.iter_mut().for_each(|s| *s = 0.5 * h.sin());
        for &gt in &[0.1, 1.0, 4.0] {
            let t = gt / base.gamma_j[0];
            let fd = (signal_mean(t, &tilted, &p) - signal_mean(t, &base, &p)) / h;
            let exact = differential_signal_slope(t, &base, &p);
            assert!(((fd - exact) / exact).abs() < 1e-4, "gT={gt}: {fd} vs {exact}");
        }
    }

    #[test]
    fn spin_noise_cases() {
        let p = SystemParams::reference();
        let ground = {
            let mut e = SpinEnsemble::homogeneous(&p, 3).unwrap();
            e.sz0_j.iter_mut().for_each(|s| *s = -0.5);
            e
        };
        assert_eq!(spin_noise(1.0, &ground, &p), 0.0);
        let e = SpinEnsemble::homogeneous(&p, 1000).unwrap();
        assert_eq!(spin_noise(0.0, &e, &p), 0.0);

        // homogeneous equator state at gamma T = 1: (lambda/gamma) * bracket
        let mut pn = p;
        pn.n_spins = 1000;
        let (chi, gamma) = (e.chi_j[0], e.gamma_j[0]);
        let lambda = measurement_quality(&pn, chi, gamma).unwrap();
        let e1 = (-1.0f64).exp();
        let bracket = (1.0 - e1) * (3.0 + e1) - 4.0 * e1;
        assert!((bracket - 0.657_388_069_734_733).abs() < 1e-14);
        let expected = lambda / gamma * bracket;
        let got = spin_noise(1.0 / gamma, &e, &p);
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn efficiency_scales_spin_noise_only() {
        let mut p = SystemParams::reference();
        let e = SpinEnsemble::homogeneous(&p, 10).unwrap();
        let full = spin_noise(0.3, &e, &p);
        p.eta = 0.25;
        assert!((spin_noise(0.3, &e, &p) - 0.25 * full).abs() < 1e-12 * full);
        assert_eq!(shot_noise(0.3, &p), 0.3);
    }

    #[test]
    fn shot_noise_cases() {
        let mut p = SystemParams::reference();
        assert_eq!(shot_noise(2.5, &p), 2.5);
        assert_eq!(shot_noise(0.0, &p), 0.0);
        p.gamma_l = p.kappa / (32.0 * p.n_bar);
        assert!((shot_noise(2.5, &p) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn two_time_corr_cases() {
        let mut e = SpinEnsemble::from_coefficients(2, 1.0, 1.0).unwrap();
        assert_eq!(two_time_corr(0.0, 0.0, 0, 1, &e, 0.07), 0.07);
        assert_eq!(two_time_corr(0.4, 0.4, 0, 0, &e, 0.0), 0.25);
        let v = two_time_corr(0.0, 1.0, 0, 0, &e, 0.0);
        let expected = 0.25 * ((-1.0f64).exp() - 1.0) + 0.25;
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.09197).abs() < 1e-5);
        // argument order does not matter once indices follow the times
        e.gamma_j[1] = 2.5;
        e.sz0_j = vec![0.3, -0.1];
        let a = two_time_corr(0.3, 1.1, 0, 1, &e, -0.03);
        let b = two_time_corr(1.1, 0.3, 1, 0, &e, -0.03);
        assert_eq!(a, b);
    }

    #[test]
    fn independent_spins_factorize() {
        let mut e = SpinEnsemble::from_coefficients(2, 1.0, 0.7).unwrap();
        e.gamma_j[1] = 1.9;
        e.sz0_j = vec![0.5, -0.2];
        for &(t, tp) in &[(0.1, 0.5), (0.8, 0.3), (2.0, 2.0)] {
            let joint = two_time_corr(t, tp, 0, 1, &e, 0.5 * -0.2);
            let product = sz_mean(t, 0.5, 0.7) * sz_mean(tp, -0.2, 1.9);
            assert!((joint - product).abs() < 1e-15);
        }
    }

    #[test]
    fn integrated_two_point_cases() {
        let mut e = SpinEnsemble::from_coefficients(2, 1.0, 1.0).unwrap();
        e.sz0_j = vec![0.1, 0.3];
        for &t in &[0.5, 2.0, 9.0] {
            assert_eq!(integrated_two_point(t, 0, 1, &e, 0.1 * 0.3), 0.0);
        }
        e.sz0_j = vec![0.0, 0.0];
        let e1 = (-1.0f64).exp();
        let expected = 0.5 * (2.0 * (1.0 - e1) - 2.0 * e1 - 0.5 * (1.0 - e1) * (1.0 - e1));
        assert!((integrated_two_point(1.0, 0, 0, &e, 0.0) - expected).abs() < 1e-15);
        assert!((expected - 0.164_347).abs() < 1e-6);
    }

    #[test]
    fn gamma_zero_limits() {
        // Bernoulli variance p(1-p) times T^2
        let e = single(0.0, 0.2);
        let t = 3.0;
        let p = 0.7;
        assert!((integrated_two_point(t, 0, 0, &e, 0.0) - p * (1.0 - p) * t * t).abs() < 1e-14);
    }

    #[test]
    fn lambda_scale_invariance() {
        // g -> c g, Delta -> c^2 Delta leaves chi and therefore lambda at fixed gamma
        let p = SystemParams::reference();
        let gamma = p.homogeneous_gamma();
        let base = derive_couplings(&p, &[0.0], &[p.g]).unwrap();
        let l0 = measurement_quality(&p, base.chi_j[0], gamma).unwrap();
        for &c in &[0.5, 3.0, 17.0] {
            let mut q = p;
            q.g *= c;
            q.delta_res *= c * c;
            let e = derive_couplings(&q, &[0.0], &[q.g]).unwrap();
            let l = measurement_quality(&q, e.chi_j[0], gamma).unwrap();
            assert!(((l - l0) / l0).abs() < 1e-13, "c = {c}");
        }
    }
}
