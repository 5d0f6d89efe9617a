use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    differential_signal_slope, equator_spin_noise, shot_noise, signal_mean, spin_noise,
    squeezing_delta, SqueezingSpec,
};
use crate::error::{ensure_finite, Error, Result};
use crate::model::{SpinEnsemble, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveWarning {
    /// A squeezing shift was evaluated with ensemble-mean coefficients
    /// because the retained spins do not share one `chi` and `gamma`.
    InhomogeneousSqueezing,
}

/// Signal and variance columns on a grid of collection times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCurve {
    pub t_grid: Vec<f64>,
    pub signal: Vec<f64>,
    pub d_signal_d_theta: Vec<f64>,
    pub spin_noise: Vec<f64>,
    pub shot_noise: Vec<f64>,
    /// Zero everywhere unless a squeezed initial state was requested.
    pub squeezing_shift: Vec<f64>,
    pub total: Vec<f64>,
    pub snr_over_sqrt_n: Vec<f64>,
    /// Wineland parameter used for the shift, if any.
    pub xi2: Option<f64>,
    pub warnings: Vec<CurveWarning>,
}

struct Point {
    signal: f64,
    slope: f64,
    spin: f64,
    shot: f64,
    shift: f64,
    snr: f64,
}

/// Evaluates every curve column at each time of `t_grid`.
///
/// `t_grid` must be strictly increasing and non-negative. With `squeezing`,
/// the shift uses the ensemble-mean `chi` and `gamma` of the retained spins
/// and the efficiency-weighted measurement quality.
pub fn variance_curve(
    t_grid: &[f64],
    ensemble: &SpinEnsemble,
    params: &SystemParams,
    squeezing: Option<&SqueezingSpec>,
) -> Result<MeasurementCurve> {
    params.validate()?;
    for &t in t_grid {
        ensure_finite("T", t)?;
        if t < 0.0 {
            return Err(Error::invalid("T", format!("collection time must be non-negative, got {t}")));
        }
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("t_grid", "must be strictly increasing"));
    }
    let n_retained = ensemble.retained_count();
    if n_retained == 0 {
        return Err(Error::AllSpinsDiscarded);
    }

    let mut warnings = Vec::new();
    let shift_params = match squeezing {
        Some(spec) => {
            if !ensemble.is_homogeneous() {
                warnings.push(CurveWarning::InhomogeneousSqueezing);
            }
            let xi2 = spec.xi2(n_retained)?;
            let (_, gamma) = ensemble.mean_coefficients()?;
            let lambda = ensemble.homogenized_lambda(params)? * params.eta;
            Some((xi2, lambda, gamma))
        }
        None => None,
    };
    let sqrt_n = (ensemble.len() as f64).sqrt();

    let points: Vec<Point> = t_grid
        .par_iter()
        .map(|&t| {
            let slope = differential_signal_slope(t, ensemble, params);
            let shift = shift_params
                .map(|(xi2, lambda, gamma)| squeezing_delta(t, xi2, lambda, gamma))
                .unwrap_or(0.0);
            let snr = if t > 0.0 {
                let noise = equator_spin_noise(t, ensemble, params) + shot_noise(t, params);
                slope.abs() / noise.sqrt() / sqrt_n
            } else {
                0.0
            };
            Point {
                signal: signal_mean(t, ensemble, params),
                slope,
                spin: spin_noise(t, ensemble, params),
                shot: shot_noise(t, params),
                shift,
                snr,
            }
        })
        .collect();

    Ok(MeasurementCurve {
        t_grid: t_grid.to_vec(),
        signal: points.iter().map(|p| p.signal).collect(),
        d_signal_d_theta: points.iter().map(|p| p.slope).collect(),
        spin_noise: points.iter().map(|p| p.spin).collect(),
        shot_noise: points.iter().map(|p| p.shot).collect(),
        squeezing_shift: points.iter().map(|p| p.shift).collect(),
        total: points.iter().map(|p| p.spin + p.shot + p.shift).collect(),
        snr_over_sqrt_n: points.iter().map(|p| p.snr).collect(),
        xi2: shift_params.map(|(xi2, _, _)| xi2),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::snr;
    use crate::model::{derive_couplings, measurement_quality};

    fn params(n: usize) -> SystemParams {
        let mut p = SystemParams::reference();
        p.n_spins = n;
        p
    }

    #[test]
    fn columns_match_pointwise_calls() {
        let p = params(50);
        let mut e = SpinEnsemble::homogeneous(&p, 50).unwrap();
        e.sz0_j[3] = 0.2;
        let grid: Vec<f64> = (0..12).map(|k| 0.05 * k as f64).collect();
        let c = variance_curve(&grid, &e, &p, None).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert_eq!(c.signal[i], signal_mean(t, &e, &p));
            assert_eq!(c.spin_noise[i], spin_noise(t, &e, &p));
            assert_eq!(c.shot_noise[i], shot_noise(t, &p));
            assert_eq!(c.total[i], c.spin_noise[i] + c.shot_noise[i]);
            if t > 0.0 {
                let s = snr(t, &e, &p).unwrap() / (50f64).sqrt();
                assert!((c.snr_over_sqrt_n[i] - s).abs() <= 1e-15 * s);
            }
        }
        assert_eq!(c.snr_over_sqrt_n[0], 0.0);
        assert_eq!(c.total[0], 0.0);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn ground_state_total_is_shot() {
        let p = params(20);
        let mut e = SpinEnsemble::homogeneous(&p, 20).unwrap();
        e.sz0_j.iter_mut().for_each(|s| *s = -0.5);
        let grid = [0.1, 0.5, 1.0, 2.0];
        let c = variance_curve(&grid, &e, &p, None).unwrap();
        assert_eq!(c.total, c.shot_noise);
    }

    #[test]
    fn squeezed_total_includes_shift() {
        let p = params(100);
        let e = SpinEnsemble::homogeneous(&p, 100).unwrap();
        let gamma = e.gamma_j[0];
        let lambda = measurement_quality(&p, e.chi_j[0], gamma).unwrap();
        let spec = SqueezingSpec::Xi2 { xi2: 0.5 };
        let grid = [0.5 / gamma, 1.25 / gamma];
        let c = variance_curve(&grid, &e, &p, Some(&spec)).unwrap();
        for i in 0..2 {
            let d = squeezing_delta(grid[i], 0.5, lambda, gamma);
            assert!((c.squeezing_shift[i] - d).abs() < 1e-12 * d.abs());
            assert_eq!(c.total[i], c.spin_noise[i] + c.shot_noise[i] + c.squeezing_shift[i]);
            assert!(c.squeezing_shift[i] < 0.0);
        }
        assert_eq!(c.xi2, Some(0.5));
    }

    #[test]
    fn inhomogeneous_squeezing_is_flagged() {
        let p = params(3);
        let e = derive_couplings(&p, &[0.0, 1e5, -2e5], &[p.g; 3]).unwrap();
        let c = variance_curve(&[0.1], &e, &p, Some(&SqueezingSpec::Xi2 { xi2: 0.8 })).unwrap();
        assert_eq!(c.warnings, vec![CurveWarning::InhomogeneousSqueezing]);
    }

    #[test]
    fn bad_grids_rejected() {
        let p = params(2);
        let e = SpinEnsemble::homogeneous(&p, 2).unwrap();
        assert!(variance_curve(&[0.2, 0.1], &e, &p, None).is_err());
        assert!(variance_curve(&[-1.0], &e, &p, None).is_err());
        assert!(variance_curve(&[f64::NAN], &e, &p, None).is_err());
    }
}
