use std::f64::consts::TAU;

use serde::Serialize;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use spin_readout::analytic::{
    homogeneous_snr, nruns_optimum, nruns_squeezing, nruns_threshold, snr_optimum, squeezing_delta,
    squeezing_run_optima, variance_curve, xi2_to_db, SqueezeAxis, SqueezingSpec,
};
use spin_readout::config::{geomspace, linspace, parse_grid};
use spin_readout::ensemble::{snr_map, DisorderConfig};
use spin_readout::numeric::log_golden_section_min;
use spin_readout::oracle::{
    desk_scale_chi, eigen_convergence, empirical_two_time_corr, mc_variance_curve, OracleReport,
    TrajectoryConfig, OAT_MAX_SPINS,
};
use spin_readout::{
    check_regime, cooperativities, effective_lambda, measurement_quality, Error, SpinEnsemble,
    SystemParams,
};

use crate::args::{Axis, OracleMode, Scale, TimeGrid};
use crate::manifest::Run;
use crate::CliError;

/// Any margin at or below this value is reported as a regime warning.
pub const REGIME_WARN_THRESHOLD: f64 = 10.0;
/// Largest accepted `|n_sigma|` for a Monte Carlo check.
pub const ORACLE_MAX_SIGMA: f64 = 5.0;
/// Accepted window around slope 2 for the dispersive sweep.
pub const SLOPE_TOLERANCE: f64 = 0.2;

pub const CURVES_HEADER: [&str; 7] = ["n_bar", "lambda", "T", "spin_noise", "shot_noise", "total", "total_over_shot"];
pub const SNR_HEADER: [&str; 3] = ["lambda", "gamma_T", "snr_over_sqrt_n"];
pub const SQUEEZE_HEADER: [&str; 4] = ["xi2", "xi2_db", "gamma_T", "delta_variance_over_shot"];
pub const RUNS_HEADER: [&str; 3] = ["gamma_T", "nruns_plain", "nruns_squeezing"];
pub const ORACLE_HEADER: [&str; 5] = ["T", "analytic", "mc", "stderr", "n_sigma"];
pub const CORRELATOR_HEADER: [&str; 6] = ["t", "t_prime", "analytic", "mc", "stderr", "n_sigma"];
pub const DISPERSIVE_HEADER: [&str; 7] = ["ratio", "shift", "chi", "shift_rel_err", "decay", "gamma", "decay_rel_err"];

struct GridDefault {
    min: f64,
    max: f64,
    points: usize,
    scale: Scale,
}

const LOG_DECADES: GridDefault = GridDefault { min: 0.01, max: 10.0, points: 200, scale: Scale::Log };

fn time_grid(run: &mut Run, grid: &TimeGrid, default: GridDefault) -> Result<Vec<f64>, CliError> {
    let min = grid.t_min.unwrap_or(default.min);
    let max = grid.t_max.unwrap_or(default.max);
    let points = grid.t_points.unwrap_or(default.points);
    let scale = grid.t_scale.unwrap_or(default.scale);
    if !(min.is_finite() && max.is_finite()) || min < 0.0 {
        return Err(CliError::Usage(format!("time range {min}..{max} must be finite and non-negative")));
    }
    if points == 0 {
        return Err(CliError::Usage("--t-points must be at least 1".into()));
    }
    if points > 1 && max <= min {
        return Err(CliError::Usage("--t-max must exceed --t-min".into()));
    }
    let values = match scale {
        Scale::Lin => linspace(min, max, points),
        Scale::Log => {
            if min <= 0.0 {
                return Err(CliError::Usage("a log time grid needs --t-min > 0".into()));
            }
            geomspace(min, max, points)
        }
    };
    run.option("t_grid", json!({ "min": min, "max": max, "points": points, "scale": format!("{scale:?}").to_lowercase() }));
    Ok(values)
}

fn list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(text).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn homogeneous_lambda(p: &SystemParams) -> Result<f64, CliError> {
    if p.delta_res.abs() <= p.discard_threshold(p.g) {
        return Err(Error::AllSpinsDiscarded.into());
    }
    Ok(measurement_quality(p, p.homogeneous_chi(), p.homogeneous_gamma())?)
}

#[derive(Serialize)]
struct RegimeFile {
    dispersive_margin: f64,
    fast_cavity_margin: f64,
    flipflop_margin: f64,
    superradiance_margin: f64,
    warn_threshold: f64,
    all_margins_above_threshold: bool,
    /// Expected fraction of a Gaussian band kept by the discard rule.
    retained_fraction: f64,
    lambda: Option<f64>,
    lambda_eff: Option<f64>,
    collective_cooperativity: Option<f64>,
    inhomogeneous_cooperativity: Option<f64>,
    lambda_max: Option<f64>,
}

fn gaussian_retained_fraction(p: &SystemParams) -> f64 {
    let thr = p.discard_threshold(p.g);
    if p.sigma_delta == 0.0 {
        return if p.delta_res.abs() > thr { 1.0 } else { 0.0 };
    }
    let n = Normal::new(0.0, p.sigma_delta).expect("positive width");
    1.0 - (n.cdf(p.delta_res + thr) - n.cdf(p.delta_res - thr))
}

pub fn regime(run: &mut Run) -> Result<i32, CliError> {
    let p = run.params;
    // margins of a spin at the band center
    let e = SpinEnsemble::derive(&p, &[0.0], &[p.g])?;
    let report = check_regime(&p, &e);
    let ok = report.all_above(REGIME_WARN_THRESHOLD);
    let lambda = homogeneous_lambda(&p).ok();
    let coop = cooperativities(&p).ok();
    let file = RegimeFile {
        dispersive_margin: report.dispersive_margin,
        fast_cavity_margin: report.fast_cavity_margin,
        flipflop_margin: report.flipflop_margin,
        superradiance_margin: report.superradiance_margin,
        warn_threshold: REGIME_WARN_THRESHOLD,
        all_margins_above_threshold: ok,
        retained_fraction: gaussian_retained_fraction(&p),
        lambda,
        lambda_eff: lambda.and_then(|l| effective_lambda(l, &p).ok()),
        collective_cooperativity: coop.map(|c| c.collective),
        inhomogeneous_cooperativity: coop.map(|c| c.inhomogeneous),
        lambda_max: coop.map(|c| c.lambda_max),
    };
    run.json("regime.json", &file)?;
    for (name, m) in report.margins() {
        let flag = if m > REGIME_WARN_THRESHOLD { "" } else { "  <- warning" };
        println!("{name:>22} {m:.4e}{flag}");
    }
    Ok(if ok { 0 } else { 2 })
}

pub fn curves(run: &mut Run, grid: &TimeGrid, n_bar: Option<&str>, lambda: Option<&str>) -> Result<i32, CliError> {
    let p = run.params;
    let gamma = p.homogeneous_gamma();
    let xs = time_grid(run, grid, LOG_DECADES)?;
    let n_bars = match (n_bar, lambda) {
        (Some(text), _) => list("n-bar", text)?,
        (None, Some(text)) => {
            let base = homogeneous_lambda(&p)?;
            if base == 0.0 {
                return Err(CliError::Usage("--lambda needs a config with n_bar > 0".into()));
            }
            list("lambda", text)?.into_iter().map(|l| p.n_bar * l / base).collect()
        }
        (None, None) => vec![p.n_bar],
    };
    run.option("n_bar", json!(n_bars));
    let ts: Vec<f64> = xs.iter().map(|x| x / gamma).collect();
    let mut rows = Vec::new();
    for &nb in &n_bars {
        let mut q = p;
        q.n_bar = nb;
        q.validate()?;
        let lambda = homogeneous_lambda(&q)?;
        let e = SpinEnsemble::homogeneous(&q, q.n_spins)?;
        let c = variance_curve(&ts, &e, &q, None)?;
        for i in 0..ts.len() {
            let total = c.spin_noise[i] + c.shot_noise[i];
            rows.push(vec![nb, lambda, ts[i], c.spin_noise[i], c.shot_noise[i], total, total / c.shot_noise[i]]);
        }
    }
    run.csv("curves.csv", &CURVES_HEADER, &rows)?;
    Ok(0)
}

#[derive(Serialize)]
struct SnrOptimumRow {
    lambda: f64,
    gamma_t: f64,
    snr_over_sqrt_n: f64,
    approx_gamma_t: f64,
    approx_snr_over_sqrt_n: f64,
}

pub fn snr(run: &mut Run, grid: &TimeGrid, lambdas: &str) -> Result<i32, CliError> {
    let xs = time_grid(run, grid, LOG_DECADES)?;
    let lambdas = list("lambda", lambdas)?;
    run.option("lambda", json!(lambdas));
    let mut rows = Vec::new();
    let mut optima = Vec::new();
    for &l in &lambdas {
        let o = snr_optimum(l)?;
        optima.push(SnrOptimumRow {
            lambda: l,
            gamma_t: o.gamma_t,
            snr_over_sqrt_n: o.snr,
            approx_gamma_t: o.approx_gamma_t,
            approx_snr_over_sqrt_n: o.approx_snr,
        });
        rows.extend(xs.iter().map(|&x| vec![l, x, homogeneous_snr(x, l)]));
    }
    run.csv("snr.csv", &SNR_HEADER, &rows)?;
    run.json("snr_optima.json", &optima)?;
    Ok(0)
}

pub fn snr_map_cmd(run: &mut Run, grid: &TimeGrid, delta_grid: &str, n_realizations: usize) -> Result<i32, CliError> {
    let p = run.params;
    if !(p.gamma_minus > 0.0) {
        return Err(CliError::Usage("snr-map measures time in units of 1/gamma_minus, which must be positive".into()));
    }
    if !(p.sigma_delta > 0.0) {
        return Err(CliError::Usage("snr-map needs sigma_delta_hz > 0".into()));
    }
    let xs = time_grid(run, grid, GridDefault { points: 30, ..LOG_DECADES })?;
    let ratios = list("delta-grid", delta_grid)?;
    run.option("delta_over_sigma", json!(ratios));
    run.option("n_realizations", json!(n_realizations));
    let cfg = DisorderConfig::gaussian(p.sigma_delta, n_realizations, run.seed);
    let ts: Vec<f64> = xs.iter().map(|x| x / p.gamma_minus).collect();
    let deltas: Vec<f64> = ratios.iter().map(|r| r * p.sigma_delta).collect();
    let mut map = snr_map(&p, &cfg, &ts, &deltas)?;
    // report detunings in the config's cyclic units
    let sigma_hz = p.sigma_delta / TAU;
    map.delta_grid = ratios.iter().map(|r| r * sigma_hz).collect();
    let mut csv = Vec::new();
    map.write_csv(&mut csv).map_err(|e| CliError::io("snr_map.csv", e))?;
    run.bytes("snr_map.csv", &csv)?;
    let mut doc = map.to_json();
    doc["delta_over_sigma"] = json!(ratios);
    doc["gamma_minus_t"] = json!(xs);
    run.json("snr_map.json", &doc)?;
    Ok(0)
}

#[derive(Serialize)]
struct SqueezeLevel {
    xi2: f64,
    xi2_db: f64,
    /// `gamma T` maximizing `|delta variance| / shot noise`.
    peak_gamma_t: Option<f64>,
}

pub fn squeeze(
    run: &mut Run,
    grid: &TimeGrid,
    lambda: Option<f64>,
    xi2: Option<&str>,
    t_sqz: Option<&str>,
    axis: Axis,
) -> Result<i32, CliError> {
    let p = run.params;
    let xs = time_grid(run, grid, LOG_DECADES)?;
    let lambda = match lambda {
        Some(l) => l,
        None => effective_lambda(homogeneous_lambda(&p)?, &p)?,
    };
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::Usage(format!("lambda must be positive, got {lambda}")));
    }
    run.option("lambda", json!(lambda));
    let levels: Vec<f64> = match t_sqz {
        Some(text) => {
            let axis = squeeze_axis(axis);
            run.option("t_sqz", json!(list("t-sqz", text)?));
            run.option("axis", json!(axis));
            list("t-sqz", text)?
                .into_iter()
                .map(|t| SqueezingSpec::Oat { t_sqz: t, axis }.xi2(p.n_spins))
                .collect::<Result<_, _>>()?
        }
        None => {
            let v = list("xi2", xi2.unwrap_or("0.5,2"))?;
            if let Some(bad) = v.iter().find(|&&x| !(x > 0.0)) {
                return Err(CliError::Usage(format!("--xi2 values must be positive, got {bad}")));
            }
            v
        }
    };
    run.option("xi2", json!(levels));
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &xi2 in &levels {
        let ratio = |x: f64| squeezing_delta(x, xi2, lambda, 1.0) / x;
        rows.extend(xs.iter().map(|&x| vec![xi2, xi2_to_db(xi2), x, if x > 0.0 { ratio(x) } else { 0.0 }]));
        let peak_gamma_t = (xi2 != 1.0).then(|| log_golden_section_min(|x| -ratio(x).abs(), 1e-3, 50.0, 1e-12).0);
        summary.push(SqueezeLevel { xi2, xi2_db: xi2_to_db(xi2), peak_gamma_t });
    }
    run.csv("squeeze.csv", &SQUEEZE_HEADER, &rows)?;
    run.json("squeeze_summary.json", &summary)?;
    Ok(0)
}

fn squeeze_axis(axis: Axis) -> SqueezeAxis {
    match axis {
        Axis::Squeezed => SqueezeAxis::Squeezed,
        Axis::AntiSqueezed => SqueezeAxis::AntiSqueezed,
    }
}

pub fn runs(run: &mut Run, grid: &TimeGrid, lambda: Option<f64>, xi2: Option<f64>) -> Result<i32, CliError> {
    let p = run.params;
    let xs = time_grid(run, grid, LOG_DECADES)?;
    let lambda = match lambda {
        Some(l) => l,
        None => effective_lambda(homogeneous_lambda(&p)?, &p)?,
    };
    if xi2 == Some(1.0) {
        return Err(CliError::Usage(
            "--xi2 1 describes an unentangled state, whose variance shift is zero and cannot be resolved".into(),
        ));
    }
    run.option("lambda", json!(lambda));
    run.option("xi2", json!(xi2));
    let plain = nruns_optimum(lambda)?;
    let squeezing = xi2.map(|v| squeezing_run_optima(lambda, v)).transpose()?;
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let a = if x > 0.0 { nruns_threshold(x, lambda, 1.0)? } else { f64::INFINITY };
        let b = match xi2 {
            Some(v) if x > 0.0 => nruns_squeezing(x, lambda, v, 1.0)?,
            Some(_) => f64::INFINITY,
            None => f64::NAN,
        };
        rows.push(vec![x, a, b]);
    }
    run.csv("runs.csv", &RUNS_HEADER, &rows)?;
    run.json("runs_summary.json", &json!({ "lambda": lambda, "xi2": xi2, "plain": plain, "squeezing": squeezing }))?;
    Ok(0)
}

#[derive(Serialize)]
struct OracleSummary {
    mode: &'static str,
    n_spins: Option<usize>,
    lambda: Option<f64>,
    n_traj: Option<usize>,
    max_n_sigma: Option<f64>,
    shift_slope: Option<f64>,
    decay_slope: Option<f64>,
    pass: bool,
}

pub struct OracleOptions<'a> {
    pub mode: OracleMode,
    pub grid: &'a TimeGrid,
    pub n_traj: usize,
    pub oracle_spins: Option<usize>,
    pub t_sqz: f64,
    pub axis: Axis,
    pub ratios: &'a str,
    pub detuning_hz: f64,
}

fn report_rows(ts: &[f64], reports: &[OracleReport]) -> Vec<Vec<f64>> {
    ts.iter()
        .zip(reports)
        .map(|(&t, r)| vec![t, r.analytic_value, r.mc_estimate, r.mc_stderr, r.n_sigma])
        .collect()
}

pub fn oracle(run: &mut Run, seed_given: bool, o: OracleOptions<'_>) -> Result<i32, CliError> {
    if !seed_given {
        return Err(CliError::Usage("oracle runs need an explicit --seed".into()));
    }
    let p = run.params;
    let mode_name = match o.mode {
        OracleMode::Variance => "variance",
        OracleMode::Squeeze => "squeeze",
        OracleMode::Dispersive => "dispersive",
        OracleMode::Correlator => "correlator",
    };
    run.option("mode", json!(mode_name));
    if o.mode == OracleMode::Dispersive {
        let ratios = list("ratios", o.ratios)?;
        if ratios.len() < 2 {
            return Err(CliError::Usage("--ratios needs at least two values for a slope".into()));
        }
        run.option("ratios", json!(ratios));
        run.option("detuning_hz", json!(o.detuning_hz));
        let r = eigen_convergence(&ratios, TAU * o.detuning_hz, p.kappa, p.gamma_minus)?;
        let rows: Vec<Vec<f64>> = r
            .points
            .iter()
            .map(|c| vec![c.ratio, c.shift, c.chi, c.shift_rel_err, c.decay, c.gamma, c.decay_rel_err])
            .collect();
        run.csv("dispersive.csv", &DISPERSIVE_HEADER, &rows)?;
        let pass = (r.shift_slope - 2.0).abs() <= SLOPE_TOLERANCE && (r.decay_slope - 2.0).abs() <= SLOPE_TOLERANCE;
        println!("shift slope {:.4}, decay slope {:.4}", r.shift_slope, r.decay_slope);
        run.json(
            "oracle_summary.json",
            &OracleSummary {
                mode: mode_name,
                n_spins: None,
                lambda: None,
                n_traj: None,
                max_n_sigma: None,
                shift_slope: Some(r.shift_slope),
                decay_slope: Some(r.decay_slope),
                pass,
            },
        )?;
        return Ok(if pass { 0 } else { 2 });
    }

    if o.n_traj < 2 {
        return Err(CliError::Usage("--n-traj must be at least 2 for a standard error".into()));
    }
    run.option("n_traj", json!(o.n_traj));
    let lambda = homogeneous_lambda(&p)?;
    let (chi, gamma) = (p.homogeneous_chi(), p.homogeneous_gamma());
    let cfg = TrajectoryConfig { n_traj: o.n_traj, seed: run.seed, include_shot_noise: true };

    let (n_spins, max_n_sigma) = if o.mode == OracleMode::Correlator {
        let xs = time_grid(run, o.grid, GridDefault { min: 0.0, max: 3.0, points: 4, scale: Scale::Lin })?;
        let ts: Vec<f64> = xs.iter().map(|x| x / gamma).collect();
        let e = SpinEnsemble::from_coefficients(1, chi, gamma)?;
        let reports = empirical_two_time_corr(&e, 0, &ts, &cfg)?;
        let k = ts.len();
        let rows: Vec<Vec<f64>> = reports
            .iter()
            .enumerate()
            .map(|(c, r)| vec![ts[c / k], ts[c % k], r.analytic_value, r.mc_estimate, r.mc_stderr, r.n_sigma])
            .collect();
        run.csv("correlator.csv", &CORRELATOR_HEADER, &rows)?;
        (1, reports.iter().map(|r| r.n_sigma).fold(0.0, f64::max))
    } else {
        let squeezing = match o.mode {
            OracleMode::Squeeze => Some(SqueezingSpec::Oat { t_sqz: o.t_sqz, axis: squeeze_axis(o.axis) }),
            _ => None,
        };
        let default_spins = if squeezing.is_some() { 16 } else { 100 };
        let n_desk = o.oracle_spins.unwrap_or(default_spins);
        if n_desk == 0 || (squeezing.is_some() && n_desk > OAT_MAX_SPINS) {
            return Err(CliError::Usage(format!("--oracle-spins {n_desk} is out of range")));
        }
        run.option("oracle_spins", json!(n_desk));
        if let Some(s) = &squeezing {
            run.option("squeezing", json!(s));
        }
        let xs = time_grid(run, o.grid, GridDefault { min: 0.1, max: 4.0, points: 8, scale: Scale::Lin })?;
        let ts: Vec<f64> = xs.iter().map(|x| x / gamma).collect();
        let mut q = p;
        q.n_spins = n_desk;
        let e = SpinEnsemble::from_coefficients(n_desk, desk_scale_chi(chi, p.n_spins, n_desk), gamma)?;
        let c = mc_variance_curve(&ts, &e, &q, &cfg, squeezing.as_ref())?;
        run.csv("oracle_mean.csv", &ORACLE_HEADER, &report_rows(&ts, &c.mean))?;
        run.csv("oracle_variance.csv", &ORACLE_HEADER, &report_rows(&ts, &c.variance))?;
        (n_desk, c.max_n_sigma())
    };
    let pass = max_n_sigma <= ORACLE_MAX_SIGMA;
    println!("max n_sigma {max_n_sigma:.3} over {} trajectories", o.n_traj);
    run.json(
        "oracle_summary.json",
        &OracleSummary {
            mode: mode_name,
            n_spins: Some(n_spins),
            lambda: Some(lambda),
            n_traj: Some(o.n_traj),
            max_n_sigma: Some(max_n_sigma),
            shift_slope: None,
            decay_slope: None,
            pass,
        },
    )?;
    Ok(if pass { 0 } else { 2 })
}
