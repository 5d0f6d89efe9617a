use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_frequencies, DisorderConfig};
use crate::analytic::{differential_signal_slope, equator_spin_noise, shot_noise};
use crate::error::{ensure_finite, Error, Result};
use crate::model::{SpinEnsemble, SystemParams};
use crate::output::{format_value, CsvWriter};

/// Disorder-averaged `SNR / sqrt(N)` on a `(T, Delta)` grid.
///
/// Matrices are indexed `[t][delta]`. Cells where no realization kept a
/// single spin hold `NaN` and `valid = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrMap {
    pub t_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub snr_mean: Vec<Vec<f64>>,
    pub snr_stderr: Vec<Vec<f64>>,
    pub retained_fraction: Vec<Vec<f64>>,
    pub valid: Vec<Vec<bool>>,
    /// Per-realization values, `[realization][t][delta]`.
    pub realizations: Vec<Vec<Vec<f64>>>,
}

pub const SNR_MAP_HEADER: [&str; 5] = ["T", "Delta", "snr_mean", "snr_stderr", "retained_fraction"];

impl SnrMap {
    /// Long-format CSV, `T` varying slowest.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = CsvWriter::new(out);
        w.header(&SNR_MAP_HEADER)?;
        for (i, &t) in self.t_grid.iter().enumerate() {
            for (k, &d) in self.delta_grid.iter().enumerate() {
                w.row(&[t, d, self.snr_mean[i][k], self.snr_stderr[i][k], self.retained_fraction[i][k]])?;
            }
        }
        w.finish()
    }

    /// JSON document with grids and matrices; invalid cells become `"NA"`.
    pub fn to_json(&self) -> serde_json::Value {
        let matrix = |m: &Vec<Vec<f64>>| {
            serde_json::Value::Array(
                m.iter()
                    .map(|row| row.iter().map(|&v| json_number(v)).collect())
                    .collect(),
            )
        };
        serde_json::json!({
            "t_grid": self.t_grid.iter().map(|&v| json_number(v)).collect::<Vec<_>>(),
            "delta_grid": self.delta_grid.iter().map(|&v| json_number(v)).collect::<Vec<_>>(),
            "snr_mean": matrix(&self.snr_mean),
            "snr_stderr": matrix(&self.snr_stderr),
            "retained_fraction": matrix(&self.retained_fraction),
            "realizations": self.realizations.iter().map(matrix).collect::<Vec<_>>(),
        })
    }
}

fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(format_value(v))
    }
}

struct Cell {
    snr: Option<Vec<f64>>,
    retained_fraction: f64,
}

fn evaluate_cell(
    params: &SystemParams,
    detunings: &[f64],
    delta_res: f64,
    t_grid: &[f64],
) -> Result<Cell> {
    let mut p = *params;
    p.delta_res = delta_res;
    let couplings = vec![params.g; detunings.len()];
    let ensemble = SpinEnsemble::derive(&p, detunings, &couplings)?;
    let retained_fraction = ensemble.retained_fraction();
    if ensemble.retained_count() == 0 {
        return Ok(Cell { snr: None, retained_fraction });
    }
    let sqrt_n = (ensemble.len() as f64).sqrt();
    let snr = t_grid
        .iter()
        .map(|&t| {
            let slope = differential_signal_slope(t, &ensemble, &p);
            let noise = equator_spin_noise(t, &ensemble, &p) + shot_noise(t, &p);
            slope.abs() / noise.sqrt() / sqrt_n
        })
        .collect();
    Ok(Cell {
        snr: Some(snr),
        retained_fraction,
    })
}

/// Rebuilds every realization with each resonator detuning in `delta_grid`
/// and averages `SNR / sqrt(N)` over realizations at every collection time.
///
/// A realization keeps its sampled frequencies across the detuning axis.
/// Work is split over `(realization, Delta)` pairs and reduced in index
/// order, so the result does not depend on the thread count.
pub fn snr_map(
    params: &SystemParams,
    config: &DisorderConfig,
    t_grid: &[f64],
    delta_grid: &[f64],
) -> Result<SnrMap> {
    params.validate()?;
    config.validate()?;
    if t_grid.is_empty() || delta_grid.is_empty() {
        return Err(Error::invalid("grid", "time and detuning grids must be non-empty"));
    }
    for &t in t_grid {
        ensure_finite("T", t)?;
        if t <= 0.0 {
            return Err(Error::invalid("T", format!("collection times must be positive, got {t}")));
        }
    }
    for &d in delta_grid {
        ensure_finite("Delta", d)?;
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || delta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }

    let n_real = config.n_realizations;
    let samples: Vec<Vec<f64>> = (0..n_real)
        .into_par_iter()
        .map(|r| sample_frequencies(config, r, params.n_spins))
        .collect::<Result<_>>()?;
    let nd = delta_grid.len();
    let cells: Vec<Cell> = (0..n_real * nd)
        .into_par_iter()
        .map(|idx| evaluate_cell(params, &samples[idx / nd], delta_grid[idx % nd], t_grid))
        .collect::<Result<_>>()?;

    let nt = t_grid.len();
    let mut snr_mean = vec![vec![f64::NAN; nd]; nt];
    let mut snr_stderr = vec![vec![f64::NAN; nd]; nt];
    let mut retained = vec![vec![0.0; nd]; nt];
    let mut valid = vec![vec![false; nd]; nt];
    let mut realizations = vec![vec![vec![f64::NAN; nd]; nt]; n_real];
    for k in 0..nd {
        let column: Vec<&Cell> = (0..n_real).map(|r| &cells[r * nd + k]).collect();
        let fraction = column.iter().map(|c| c.retained_fraction).sum::<f64>() / n_real as f64;
        for i in 0..nt {
            retained[i][k] = fraction;
            let values: Vec<f64> = column.iter().filter_map(|c| c.snr.as_ref().map(|s| s[i])).collect();
            for (r, c) in column.iter().enumerate() {
                if let Some(s) = &c.snr {
                    realizations[r][i][k] = s[i];
                }
            }
            if values.is_empty() {
                continue;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let stderr = if values.len() < 2 {
                0.0
            } else {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            };
            snr_mean[i][k] = mean;
            snr_stderr[i][k] = stderr;
            valid[i][k] = true;
        }
    }
    Ok(SnrMap {
        t_grid: t_grid.to_vec(),
        delta_grid: delta_grid.to_vec(),
        snr_mean,
        snr_stderr,
        retained_fraction: retained,
        valid,
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::homogeneous_snr;
    use crate::model::measurement_quality;

    fn desk_params(n: usize) -> SystemParams {
        let mut p = SystemParams::reference();
        p.n_spins = n;
        p
    }

    #[test]
    fn narrow_band_collapses_to_homogeneous() {
        let p = desk_params(200);
        let sigma = 1e-6 * p.sigma_delta;
        let cfg = DisorderConfig::gaussian(sigma, 3, 8);
        let deltas = [p.sigma_delta, 5.0 * p.sigma_delta];
        let ts = [0.2 / p.gamma_minus, 1.0 / p.gamma_minus];
        let map = snr_map(&p, &cfg, &ts, &deltas).unwrap();
        for (k, &d) in deltas.iter().enumerate() {
            let mut q = p;
            q.delta_res = d;
            let (chi, gamma) = (q.homogeneous_chi(), q.homogeneous_gamma());
            let lambda = measurement_quality(&q, chi, gamma).unwrap();
            for (i, &t) in ts.iter().enumerate() {
                let want = homogeneous_snr(gamma * t, lambda);
                assert!(((map.snr_mean[i][k] - want) / want).abs() < 1e-3);
                assert!(map.valid[i][k]);
            }
        }
    }

    #[test]
    fn invalid_cells_are_marked() {
        let mut p = desk_params(50);
        p.sigma_delta = 1.0;
        let cfg = DisorderConfig::gaussian(1.0, 2, 1);
        let map = snr_map(&p, &cfg, &[0.5], &[0.0, p.delta_res]).unwrap();
        assert!(!map.valid[0][0]);
        assert!(map.snr_mean[0][0].is_nan());
        assert_eq!(map.retained_fraction[0][0], 0.0);
        assert!(map.valid[0][1]);
        let mut csv = Vec::new();
        map.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("T,Delta,snr_mean,snr_stderr,retained_fraction\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",NA,NA,0"));
    }

    #[test]
    fn single_realization_has_zero_stderr() {
        let p = desk_params(30);
        let cfg = DisorderConfig::gaussian(p.sigma_delta, 1, 4);
        let map = snr_map(&p, &cfg, &[0.5], &[p.delta_res]).unwrap();
        assert_eq!(map.snr_stderr[0][0], 0.0);
    }

    #[test]
    fn perturbing_one_spin_is_continuous() {
        let p = desk_params(500);
        let cfg = DisorderConfig::gaussian(p.sigma_delta, 1, 12);
        let mut d = sample_frequencies(&cfg, 0, p.n_spins).unwrap();
        let t = [1.0 / p.gamma_minus];
        let a = evaluate_cell(&p, &d, p.delta_res, &t).unwrap().snr.unwrap()[0];
        d[7] += 1e-9 * p.sigma_delta;
        let b = evaluate_cell(&p, &d, p.delta_res, &t).unwrap().snr.unwrap()[0];
        assert!(((a - b) / a).abs() < 1e-6);
    }
}
