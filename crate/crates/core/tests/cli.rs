use std::path::Path;
use std::process::{Command, Output};

fn salpeter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salpeter"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn salpeter")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.scenario"))
        .to_string_lossy()
        .into_owned()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(salpeter(&["--help"]).status.code(), Some(0));
    assert_eq!(salpeter(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = salpeter(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_override_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let f = scenario("free");
    let out = salpeter(&["eigen", "--scenario", &f, "--out", out_dir, "--override", "grid.n_points=7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n_points"));
    let out = salpeter(&["eigen", "--scenario", &f, "--out", out_dir, "--override", "packet.x0=-39.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scenario_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = salpeter(&["eigen", "--scenario", "/nonexistent/x.scenario", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn delta_check_rejects_wide_barrier() {
    let dir = tempfile::tempdir().unwrap();
    let out = salpeter(&[
        "delta-check",
        "--scenario",
        &scenario("delta_limit"),
        "--out",
        dir.path().to_str().unwrap(),
        "--override",
        "potential.width=0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_eigen_spectrum_is_the_dispersion() {
    let dir = tempfile::tempdir().unwrap();
    let out = salpeter(&[
        "eigen",
        "--scenario",
        &scenario("free"),
        "--out",
        dir.path().to_str().unwrap(),
        "--override",
        "grid.n_points=64",
        "--override",
        "packet.delta_x=20",
        "--no-cache",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("eigen.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["index", "energy"]);
    let energies: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    // p_k = (k − 32)·2π/80 on the 64-node lattice over [−40, 40].
    let dp = 2.0 * std::f64::consts::PI / 80.0;
    let mut expected: Vec<f64> = (0..64).map(|k| (1.0 + ((k as f64 - 32.0) * dp).powi(2)).sqrt()).collect();
    expected.sort_by(f64::total_cmp);
    assert_eq!(energies.len(), 64);
    for (a, b) in energies.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eigen.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eigen");
    assert_eq!(manifest["eigenbasis_cache"]["disabled"], 1);
    assert!(!dir.path().join("cache").exists());
}

#[test]
fn second_run_hits_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let f = scenario("free");
    let args = [
        "eigen", "--scenario", &f, "--out", d, "--override", "grid.n_points=64", "--override", "packet.delta_x=20",
    ];
    assert!(salpeter(&args).status.success());
    let first = std::fs::read(dir.path().join("eigen.csv")).unwrap();
    assert!(salpeter(&args).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eigen.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["eigenbasis_cache"]["hits"], 1);
    assert_eq!(first, std::fs::read(dir.path().join("eigen.csv")).unwrap());
}
