use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use spin_readout_cli::RunManifest;

const BIN: &str = env!("CARGO_BIN_EXE_spin-readout");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn spin_readout(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code().expect("exit code"), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn first_line(path: PathBuf) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn golden_headers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&[&str], &str, &str); 6] = [
        (&["curves", "--t-points", "3"], "curves.csv", "n_bar,lambda,T,spin_noise,shot_noise,total,total_over_shot"),
        (&["snr", "--t-points", "3"], "snr.csv", "lambda,gamma_T,snr_over_sqrt_n"),
        (&["squeeze", "--t-points", "3", "--lambda", "10"], "squeeze.csv", "xi2,xi2_db,gamma_T,delta_variance_over_shot"),
        (&["runs", "--t-points", "3", "--lambda", "10"], "runs.csv", "gamma_T,nruns_plain,nruns_squeezing"),
        (
            &["oracle", "dispersive", "--seed", "1"],
            "dispersive.csv",
            "ratio,shift,chi,shift_rel_err,decay,gamma,decay_rel_err",
        ),
        (
            &["oracle", "correlator", "--seed", "1", "--n-traj", "100"],
            "correlator.csv",
            "t,t_prime,analytic,mc,stderr,n_sigma",
        ),
    ];
    for (args, file, header) in cases {
        let (code, err) = spin_readout(args, d);
        assert!(code == 0 || args[0] == "oracle", "{args:?}: {err}");
        assert_eq!(first_line(d.join(file)), header);
    }
    let desk = configs().join("desk.json");
    let (code, err) = spin_readout(
        &["snr-map", "--config", desk.to_str().unwrap(), "--t-points", "2", "--delta-grid", "1,5", "--n-realizations", "2"],
        d,
    );
    assert_eq!(code, 0, "{err}");
    assert_eq!(first_line(d.join("snr_map.csv")), "T,Delta,snr_mean,snr_stderr,retained_fraction");
    let (_, err) = spin_readout(&["oracle", "variance", "--seed", "1", "--n-traj", "100", "--t-points", "2"], d);
    assert_eq!(first_line(d.join("oracle_mean.csv")), "T,analytic,mc,stderr,n_sigma", "{err}");
    assert_eq!(first_line(d.join("oracle_variance.csv")), "T,analytic,mc,stderr,n_sigma");
}

#[test]
fn regime_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let reference = configs().join("reference.json");
    assert_eq!(spin_readout(&["regime", "--config", reference.to_str().unwrap()], d).0, 0);

    // resonator detuning exactly at the discard threshold g sqrt(n_bar)
    let edge = d.join("edge.json");
    fs::write(
        &edge,
        r#"{"n_spins": 1000, "g_hz": 50, "sigma_delta_hz": 1e6, "gamma_minus_hz": 1,
            "kappa_hz": 1e5, "delta_hz": 15811.388300841898, "n_bar": 1e5}"#,
    )
    .unwrap();
    assert_eq!(spin_readout(&["regime", "--config", edge.to_str().unwrap()], d).0, 2);

    let bad = d.join("bad.json");
    fs::write(&bad, "{\n  \"n_spins\": 4,\n  \"g_Hz\": 1\n}").unwrap();
    let (code, err) = spin_readout(&["regime", "--config", bad.to_str().unwrap()], d);
    assert_eq!(code, 1);
    assert!(err.contains("line 3") && err.contains("g_Hz"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["oracle", "variance"][..],
        &["oracle", "variance", "--seed", "3", "--n-traj", "1"],
        &["runs", "--lambda", "10", "--xi2", "1"],
        &["snr", "--t-min", "0", "--t-scale", "log"],
        &["curves", "--config", "/nonexistent/params.json"],
        &["no-such-command"],
    ] {
        assert_eq!(spin_readout(args, d).0, 1, "{args:?}");
    }
}

#[test]
fn dark_cavity_total_equals_shot() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = spin_readout(&["curves", "--n-bar", "0", "--t-points", "5"], dir.path());
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[5], f[4]);
        assert_eq!(f[6], "1");
    }
}

#[test]
fn unit_xi2_gives_zero_column() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(spin_readout(&["squeeze", "--xi2", "1", "--t-points", "4"], dir.path()).0, 0);
    let text = fs::read_to_string(dir.path().join("squeeze.csv")).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.starts_with("1,0,") && line.ends_with(",0"), "{line}");
    }
}

fn read_bytes(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap()
}

#[test]
fn manifest_lists_outputs_and_digest_tracks_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    spin_readout(&["runs", "--lambda", "10", "--xi2", "0.5", "--t-points", "4"], d);
    let m: RunManifest = serde_json::from_slice(&read_bytes(&d.join("runs.manifest.json"))).unwrap();
    assert_eq!(m.command, "runs");
    assert_eq!(m.outputs, vec!["runs.csv", "runs_summary.json"]);
    for f in &m.outputs {
        assert!(d.join(f).exists());
    }
    assert_eq!(m.config_digest.len(), 64);
    spin_readout(&["runs", "--lambda", "10", "--xi2", "0.5", "--t-points", "4", "--workers", "3"], d);
    let again: RunManifest = serde_json::from_slice(&read_bytes(&d.join("runs.manifest.json"))).unwrap();
    assert_eq!(again, m);
    spin_readout(&["runs", "--lambda", "11", "--xi2", "0.5", "--t-points", "4"], d);
    let other: RunManifest = serde_json::from_slice(&read_bytes(&d.join("runs.manifest.json"))).unwrap();
    assert_ne!(other.config_digest, m.config_digest);
}

#[test]
fn curves_are_byte_identical_across_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["curves", "--lambda", "1,40", "--t-points", "50"];
    spin_readout(&[&args[..], &["--workers", "1"]].concat(), a.path());
    spin_readout(&[&args[..], &["--workers", "6"]].concat(), b.path());
    for f in ["curves.csv", "curves.manifest.json"] {
        assert_eq!(read_bytes(&a.path().join(f)), read_bytes(&b.path().join(f)), "{f}");
    }
}
