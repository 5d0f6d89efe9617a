//! Small numerical kernels shared by the analytic formulas.
//!
//! All decay integrals in this crate reduce to a handful of functions of the
//! dimensionless decay exponent `x = gamma * T`. They are evaluated here in a
//! form that stays accurate for `x -> 0` (no catastrophic cancellation) and
//! for very large `x` (exponentials clamped to zero).

/// Exponents beyond this are treated as full decay: `exp(-x) == 0`.
pub const EXP_CLAMP: f64 = 700.0;

/// Below this exponent the power series are used instead of closed forms.
const SERIES_CUTOFF: f64 = 0.1;

/// `exp(-x)`, clamped to exactly zero for `x > EXP_CLAMP`.
#[inline]
pub fn decay(x: f64) -> f64 {
    if x > EXP_CLAMP {
        0.0
    } else {
        (-x).exp()
    }
}

/// `1 - exp(-x)`.
#[inline]
pub fn one_minus_decay(x: f64) -> f64 {
    if x > EXP_CLAMP {
        1.0
    } else {
        -(-x).exp_m1()
    }
}

/// `(1 - exp(-x)) / x`, with the limit 1 at `x = 0`.
#[inline]
pub fn decay_integral_ratio(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        one_minus_decay(x) / x
    }
}

/// `[2(1 - e^{-x}) - 2 x e^{-x}] / x^2`, the double-integral kernel of the
/// connected same-spin correlator. Limit 1 at `x = 0`.
pub fn correlator_kernel(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        // 2 * sum_{n>=2} (-1)^n (n-1) x^(n-2) / n!
        let mut sum = 0.0;
        let mut power = 1.0; // x^(n-2)
        let mut factorial = 2.0; // n!
        for n in 2..24u32 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * f64::from(n - 1) * power / factorial;
            power *= x;
            factorial *= f64::from(n + 1);
        }
        2.0 * sum
    } else {
        let e = decay(x);
        (2.0 * one_minus_decay(x) - 2.0 * x * e) / (x * x)
    }
}

/// Homogeneous equator-state bracket
/// `(1 - e^{-x})(3 + e^{-x}) - 4 x e^{-x}`.
pub fn equator_bracket(x: f64) -> f64 {
    let a = decay_integral_ratio(x);
    // 2 f(x) - (1 - e^{-x})^2, written in units of x^2 for small-x accuracy
    x * x * (2.0 * correlator_kernel(x) - a * a)
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmin, min)`. Terminates when the bracket is narrower than
/// `tol * (1 + |x|)`.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (hi - lo).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizes a unimodal function of a positive variable by golden-section
/// search in `ln x` over `[lo, hi]`.
pub fn log_golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (u, fu) = golden_section_min(|u| f(u.exp()), lo.ln(), hi.ln(), tol);
    (u.exp(), fu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel_direct(x: f64) -> f64 {
        let e = (-x).exp();
        (2.0 * (1.0 - e) - 2.0 * x * e) / (x * x)
    }

    #[test]
    fn kernel_series_matches_closed_form_at_cutoff() {
        for &x in &[0.05, 0.09, 0.0999, 0.1, 0.2] {
            let rel = (correlator_kernel(x) - kernel_direct(x)).abs() / kernel_direct(x);
            assert!(rel < 1e-13, "x = {x}: rel {rel}");
        }
        assert_eq!(correlator_kernel(0.0), 1.0);
    }

    #[test]
    fn equator_bracket_matches_direct_form() {
        for &x in &[0.5f64, 1.0, 2.0, 7.0] {
            let e = (-x).exp();
            let direct = (1.0 - e) * (3.0 + e) - 4.0 * e * x;
            assert!((equator_bracket(x) - direct).abs() < 1e-13);
        }
        // small x: bracket ~ x^2
        let x = 1e-6;
        assert!((equator_bracket(x) / (x * x) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn clamp_beyond_700() {
        assert_eq!(decay(701.0), 0.0);
        assert_eq!(one_minus_decay(1e4), 1.0);
        assert!((equator_bracket(1e4) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 1.3) * (x - 1.3) + 2.0, 0.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }
}
