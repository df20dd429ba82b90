use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcausal"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(command)
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .unwrap()
}

fn outputs(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["outputs"].clone()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn qubit_zx_tables() {
    let out = run("probabilities", &scenario("qubit-zx.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let o = outputs(&out);
    for j in 0..2 {
        assert!((f(&o["joint"][0][j]) - 0.5).abs() < 1e-12);
        assert!(f(&o["joint"][1][j]).abs() < 1e-12);
        assert!((f(&o["pre_condition"][0][j]) - 0.5).abs() < 1e-12);
        assert!((f(&o["post_condition"][0][j]) - 1.0).abs() < 1e-12);
    }
    assert!(o["pre_condition"][1][0].is_null());
    assert!((f(&o["normalization"]["total"]) - 1.0).abs() < 1e-12);
}

#[test]
fn repeat_z_is_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\n[probabilities]\npreset = \"repeat-z\"\n");
    let o = outputs(&run("probabilities", &cfg, &[]));
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { 0.5 } else { 0.0 };
            assert!((f(&o["joint"][i][j]) - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn missing_observable_exits_2_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\n[probabilities]\nstate = \"ket0\"\na = \"sigma_z\"\n");
    let out = run("probabilities", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("probabilities.b"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_keys_and_versions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\n[onset]\nv = 0.1\nL = 1.0\nspeed = 3\n");
    let out = run("onset", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
    let cfg = write_config(&dir, "version = 7\n[onset]\nv = 0.1\nL = 1.0\n");
    assert_eq!(run("onset", &cfg, &[]).status.code(), Some(2));
    let cfg = write_config(&dir, "version = 1\n");
    assert_eq!(run("onset", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn contextuality_presets() {
    let o = outputs(&run("contextuality", &scenario("qutrit-context.toml"), &[]));
    assert!(f(&o["delta"]).abs() < 1e-12);
    let o = outputs(&run("contextuality", &scenario("qutrit-context-earlier.toml"), &[]));
    assert!((f(&o["delta"]) - 2.0 / 15.0).abs() < 1e-12);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\n[contextuality]\npreset = \"commuting\"\n");
    assert!(f(&outputs(&run("contextuality", &cfg, &[]))["delta"]).abs() < 1e-12);
    let cfg = write_config(
        &dir,
        "version = 1\n[contextuality]\npreset = \"qutrit-earlier\"\nmode = \"pre\"\n",
    );
    assert!(f(&outputs(&run("contextuality", &cfg, &[]))["delta"]).abs() < 1e-12);
}

#[test]
fn invalid_coarsening_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "version = 1\n[contextuality]\npreset = \"qutrit\"\ncoarse_groups = [[0, 1], [1, 2]]\n",
    );
    assert_eq!(run("contextuality", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn signaling_matches_tanh_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    let out = run("signaling", &scenario("epr.toml"), &["--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let o = outputs(&out);
    assert!((f(&o["signal"]["delta"]) - 1f64.tanh()).abs() < 1e-6);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,signal_z,signal_x,delta\n"));
    assert_eq!(text.lines().count(), 52);

    let cfg = write_config(&dir, "version = 1\n[signaling]\nt = 0.0\n");
    assert_eq!(f(&outputs(&run("signaling", &cfg, &[]))["signal"]["delta"]), 0.0);
    let cfg = write_config(&dir, "version = 1\n[signaling]\nlaw = \"linear-z\"\nt = 1.0\n");
    let out = run("signaling", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(f(&outputs(&out)["signal"]["delta"]).abs() < 1e-10);
    let cfg = write_config(&dir, "version = 1\n[signaling]\nlaw = \"quadratic\"\n");
    assert_eq!(run("signaling", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn onset_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (v, l, eps, expected) in [(0.0, 10.0, 0.01, 0.0), (0.5, 10.0, 0.01, 5.0), (0.9, 1.0, 0.0, 0.9)] {
        let cfg = write_config(&dir, &format!("version = 1\n[onset]\nv = {v:?}\nL = {l:?}\neps = {eps:?}\n"));
        let o = outputs(&run("onset", &cfg, &[]));
        assert!((f(&o["discrepancy"]) - expected).abs() < 1e-12, "v={v}");
    }
    let cfg = write_config(&dir, "version = 1\n[onset]\nv = 1.0\nL = 1.0\n");
    assert_eq!(run("onset", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn verify_b_identity_and_controls() {
    let out = run("verify-b", &scenario("verify-identity.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = &outputs(&out)["verdict"];
    for key in ["commutation", "restriction", "covariance"] {
        assert_eq!(f(&v[key]["max_residual"]), 0.0);
        assert_eq!(v[key]["pass"], Value::Bool(true));
    }
    assert!(v["covariance"]["note"].is_string());

    let dir = tempfile::tempdir().unwrap();
    for (family, key) in [
        ("global-coupled-rotation", "commutation"),
        ("local-number-rotation", "restriction"),
        ("time-step-phase", "covariance"),
    ] {
        let cfg = write_config(&dir, &format!("version = 1\n[verify_b]\nfamily = \"{family}\"\nsamples = 80\n"));
        let out = run("verify-b", &cfg, &[]);
        assert_eq!(out.status.code(), Some(1), "{family}");
        let v = &outputs(&out)["verdict"];
        assert!(f(&v[key]["max_residual"]) > 1e-3);
        assert_eq!(v["as_expected"], Value::Bool(true));
    }
    let cfg = write_config(&dir, "version = 1\n[verify_b]\nfamily = \"nope\"\n");
    let out = run("verify-b", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn gauge_reports() {
    let out = run("gauge", &scenario("gauge-nonlinear-phase.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(f(&outputs(&out)["max_discrepancy"]) < 1e-9);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\n[gauge]\ngauge = \"identity\"\n");
    assert_eq!(f(&outputs(&run("gauge", &cfg, &[]))["max_discrepancy"]), 0.0);
    let cfg = write_config(&dir, "version = 1\n[gauge]\ngauge = \"broken\"\n");
    let out = run("gauge", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(f(&outputs(&out)["max_discrepancy"]) > 1e-3);
}

#[test]
fn reports_are_byte_identical_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "version = 1\nseed = 3\n[verify_b]\nfamily = \"local-nonlinear-rotation\"\nsamples = 40\n");
    let a = run("verify-b", &cfg, &[]);
    let b = run("verify-b", &cfg, &[]);
    assert_eq!(a.stdout, b.stdout);
    let c = run("verify-b", &cfg, &["--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
    let report: Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(report["seed"], 4);
    assert!(report.get("timing_ms").is_none());
    assert_eq!(report["inputs_digest"].as_str().unwrap().len(), 64);

    let out_path = dir.path().join("report.json");
    let d = run("verify-b", &cfg, &["--out", out_path.to_str().unwrap(), "--timing"]);
    assert!(d.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(written["timing_ms"].as_f64().unwrap() >= 0.0);
}
