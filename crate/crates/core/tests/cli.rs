use std::path::Path;

use diractime::cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

fn go(args: &[&str]) -> i32 {
    let mut v = vec!["diractime"];
    v.extend_from_slice(args);
    run(v)
}

fn out(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(go(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(go(&["spectrum", "--n", "many"]), EXIT_USAGE);
    assert_eq!(go(&["spectrum", "--m0", "-1"]), EXIT_USAGE);
    assert_eq!(go(&["evolve", "--config", "/nonexistent/run.cfg"]), EXIT_USAGE);
    assert_eq!(go(&["--help"]), EXIT_OK);
}

#[test]
fn bad_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dim = 1\nbogus = 3\n").unwrap();
    assert_eq!(go(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out(dir.path())]), EXIT_USAGE);
    assert!(!dir.path().join("spectrum.json").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn = 64\nextent = 80\nm0 = 3\n").unwrap();
    assert_eq!(go(&["spectrum", "--config", cfg.to_str().unwrap(), "--m0", "2", "--out", out(dir.path())]), EXIT_OK);
    let s = json(&dir.path().join("spectrum.json"));
    let gap = s["energy_gap"].as_f64().unwrap();
    assert!((gap - 4.0).abs() < 1e-12, "{s}");
}

#[test]
fn spectrum_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(go(&["spectrum", "--n", "256", "--out", out(dir.path())]), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("spectrum_hamiltonian.csv")).unwrap();
    assert!(csv.starts_with("p_0[m],"));
    assert_eq!(csv.lines().count(), 1 + 2 * 256);
    assert!(dir.path().join("spectrum_time.csv").exists());
}

#[test]
fn evolve_and_zitter_write_traces() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(go(&["evolve", "--samples", "32", "--observables", "x_0,beta", "--out", out(dir.path())]), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("evolve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 33);
    assert!(csv.lines().next().unwrap().contains("norm"));

    assert_eq!(go(&["zitter", "--out", out(dir.path())]), EXIT_OK);
    assert!(dir.path().join("zitter.csv").exists());
    let z = json(&dir.path().join("zitter.json"));
    assert!(z.to_string().contains("claimed_period"));
}

#[test]
fn energy_evolution_of_edge_packet_is_a_setup_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = go(&["evolve", "--generator", "T", "--n", "64", "--extent", "20", "--width", "6", "--out", out(dir.path())]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn uncertainty_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(go(&["uncertainty", "--out", out(dir.path())]), EXIT_OK);
    assert!(dir.path().join("uncertainty.json").exists());
}

#[test]
fn verify_flags_corrupted_algebra() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(go(&["verify", "--corrupt-beta", "--out", out(dir.path())]), EXIT_FAILED);
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["all_pass"], serde_json::Value::Bool(false));
    assert!(v["failed"].as_u64().unwrap() > 0);
}
