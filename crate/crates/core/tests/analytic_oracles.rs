//! Closed forms against independent numerical routes.

use spin_readout::analytic::{
    integrated_two_point, saturation_limit, shot_noise, spin_noise, sz_mean, two_time_corr,
    variance_curve,
};
use spin_readout::{measurement_quality, SpinEnsemble, SystemParams};

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `int_0^T int_0^T [C(t, t') - m_j(t) m_j'(t')]`, split along the diagonal
/// where the same-spin correlator has a kink.
fn quadrature_connected(t: f64, j: usize, jp: usize, e: &SpinEnsemble, init: f64) -> f64 {
    let n = 600;
    let connected = |a: f64, b: f64| {
        two_time_corr(a, b, j, jp, e, init)
            - sz_mean(a, e.sz0_j[j], e.gamma_j[j]) * sz_mean(b, e.sz0_j[jp], e.gamma_j[jp])
    };
    // lower triangle t < t' and upper triangle t > t'
    let lower = simpson(|tp| simpson(|a| connected(a, tp), 0.0, tp, n), 0.0, t, n);
    let upper = simpson(|a| simpson(|tp| connected(a, tp), 0.0, a, n), 0.0, t, n);
    lower + upper
}

#[test]
fn same_spin_integral_matches_quadrature() {
    for &gamma_t in &[0.5, 1.0, 3.0] {
        for &sz0 in &[-0.5, -0.2, 0.0, 0.3, 0.5] {
            let mut e = SpinEnsemble::from_coefficients(1, 1.0, 1.7).unwrap();
            e.sz0_j[0] = sz0;
            let t = gamma_t / 1.7;
            let closed = integrated_two_point(t, 0, 0, &e, 0.0);
            let quad = quadrature_connected(t, 0, 0, &e, 0.0);
            let scale = closed.abs().max(1e-12);
            assert!((closed - quad).abs() / scale < 1e-6 || (closed == 0.0 && quad.abs() < 1e-12),
                "gT={gamma_t} sz0={sz0}: {closed} vs {quad}");
        }
    }
}

#[test]
fn cross_spin_integral_matches_quadrature() {
    let mut e = SpinEnsemble::from_coefficients(2, 1.0, 0.8).unwrap();
    e.gamma_j[1] = 2.3;
    e.sz0_j = vec![0.1, -0.25];
    // correlated start: <s s> differs from the product of the means
    let init = 0.1 * -0.25 + 0.04;
    for &t in &[0.5, 1.0, 3.0] {
        let closed = integrated_two_point(t, 0, 1, &e, init);
        let quad = quadrature_connected(t, 0, 1, &e, init);
        assert!(((closed - quad) / closed).abs() < 1e-6, "T={t}: {closed} vs {quad}");
    }
}

#[test]
fn noise_crossing_slope() {
    // spin/shot = 16 n_bar N chi^2 T / kappa + O(T^2) for equator states
    let mut p = SystemParams::reference();
    p.n_spins = 1000;
    let e = SpinEnsemble::homogeneous(&p, 1000).unwrap();
    let chi = e.chi_j[0];
    let slope = 16.0 * p.n_bar * 1000.0 * chi * chi / p.kappa;
    let gamma = e.gamma_j[0];
    let grid: Vec<f64> = (1..=4).map(|k| k as f64 * 1e-6 / gamma).collect();
    let c = variance_curve(&grid, &e, &p, None).unwrap();
    let r: Vec<f64> = (0..4).map(|i| c.spin_noise[i] / c.shot_noise[i]).collect();
    let measured = (r[1] - r[0]) / (grid[1] - grid[0]);
    assert!(((measured - slope) / slope).abs() < 1e-3);
    assert!(((r[0] / grid[0] - slope) / slope).abs() < 1e-3);
}

#[test]
fn long_time_saturation() {
    let p = SystemParams::reference();
    let e = SpinEnsemble::homogeneous(&p, 1_000).unwrap();
    let mut q = p;
    q.n_spins = 1_000;
    let (chi, gamma) = (e.chi_j[0], e.gamma_j[0]);
    let sat = saturation_limit(&q, chi, gamma).unwrap();
    let lambda = measurement_quality(&q, chi, gamma).unwrap();
    assert!(((sat - 3.0 * lambda / gamma) / sat).abs() < 1e-14);
    let v = spin_noise(50.0 / gamma, &e, &p);
    assert!(((v - sat) / sat).abs() < 1e-6);
}

#[test]
fn lambda_one_and_hundred_curves() {
    let mut p = SystemParams::reference();
    p.n_spins = 1000;
    let e = SpinEnsemble::homogeneous(&p, 1000).unwrap();
    let (chi, gamma) = (e.chi_j[0], e.gamma_j[0]);
    let lambda = measurement_quality(&p, chi, gamma).unwrap();
    let grid: Vec<f64> = (1..400).map(|k| k as f64 * 0.02 / gamma).collect();
    for (target, check) in [(1.0, 1.0), (100.0, 5.0)] {
        let mut q = p;
        q.n_bar = p.n_bar * target / lambda;
        let c = variance_curve(&grid, &e, &q, None).unwrap();
        let peak = (0..grid.len())
            .map(|i| c.total[i] / shot_noise(grid[i], &q))
            .fold(0.0, f64::max);
        if target == 1.0 {
            assert!(peak < 2.0, "lambda 1 peak {peak}");
        } else {
            assert!(peak > check, "lambda 100 peak {peak}");
        }
    }
}
