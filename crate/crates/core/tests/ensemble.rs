use spin_readout::ensemble::{build_realization, inhomogeneity_errors, snr_map, DisorderConfig};
use spin_readout::output::CsvWriter;
use spin_readout::SystemParams;

fn params(n: usize) -> SystemParams {
    SystemParams { n_spins: n, ..SystemParams::reference() }
}

#[test]
fn errors_collapse_as_band_narrows() {
    let p = params(2_000);
    let t = 1.0 / p.homogeneous_gamma();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in 0..=4 {
        let sigma = p.sigma_delta * 10f64.powi(-k);
        let e = build_realization(&p, &DisorderConfig::gaussian(sigma, 1, 3), 0).unwrap();
        let (es, en) = inhomogeneity_errors(t, &e, &p).unwrap();
        assert!(es < prev.0 && en < prev.1, "sigma {sigma}: {es} {en} after {prev:?}");
        prev = (es, en);
    }
    assert!(prev.0 < 1e-8 && prev.1 < 1e-8, "{prev:?}");
}

fn map_bytes(threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let p = params(500);
    let cfg = DisorderConfig::gaussian(p.sigma_delta, 6, 99);
    let t: Vec<f64> = [0.05, 0.3, 1.0, 2.0].iter().map(|x| x / p.gamma_minus).collect();
    let d: Vec<f64> = [0.5, 1.0, 2.0, 5.0, 20.0].iter().map(|x| x * p.sigma_delta).collect();
    let map = pool.install(|| snr_map(&p, &cfg, &t, &d)).unwrap();
    let mut out = Vec::new();
    map.write_csv(&mut out).unwrap();
    out.extend(serde_json::to_vec(&map.to_json()).unwrap());
    out
}

#[test]
fn map_is_independent_of_thread_count() {
    let one = map_bytes(1);
    assert_eq!(one, map_bytes(4));
    assert_eq!(one, map_bytes(7));
}

#[test]
fn csv_round_trips_values() {
    let mut out = Vec::new();
    let mut w = CsvWriter::new(&mut out);
    w.header(&["a", "b"]).unwrap();
    let v = [0.1 + 0.2, 6.02214076e23, f64::NAN];
    w.row(&v[..2]).unwrap();
    w.row(&[v[2], 1e-300]).unwrap();
    w.finish().unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,b");
    let parsed: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(parsed, v[..2]);
    assert!(lines[2].starts_with("NA,"));
    assert_eq!(lines[2][3..].parse::<f64>().unwrap(), 1e-300);
}
