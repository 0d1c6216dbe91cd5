//! The `resonance-lab` binary: exit codes, config round-trips and reports.

use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonance-lab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_one() {
    let out = bin(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["simulate", "average", "analyze", "campaign", "reproduce-figure"] {
        let out = bin(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--dump-config"));
    }
}

#[test]
fn reversed_interval_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        r#"{"family": {"family": "ex1"}, "init": {"kind": "shift", "rho": 1.0, "theta": 0.0},
            "integrator": {"t_start": 1.0, "t_end": 0.5}}"#,
    );
    let out = bin(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_end"));
}

#[test]
fn unknown_family_and_parameter_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"family": {"family": "ex9"}}"#);
    assert_eq!(bin(&["analyze", &a]).status.code(), Some(1));
    let b = write(dir.path(), "b.json", r#"{"family": {"family": "ex2", "params": {"zeta": 1.0}}}"#);
    assert_eq!(bin(&["analyze", &b]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    // Off resonance there is nothing to average.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", r#"{"family": {"family": "ex0", "params": {"s0": 1.4142135623730951}}}"#);
    assert_eq!(bin(&["analyze", &cfg]).status.code(), Some(2));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        r#"{"family": {"family": "ex2"}, "init": {"kind": "shift", "rho": 1.0, "theta": 0.5},
            "integrator": {"t_end": 50.0}}"#,
    );
    let csv = dir.path().join("out.csv");
    let out = bin(&["simulate", &cfg, "--out", csv.to_str().unwrap(), "--tol", "1e-8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x1,x2,rho,theta\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn dump_config_round_trips_to_the_same_hash() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin(&["reproduce-figure", "5", "--dump-config", "--t-end", "2000", "--seed", "9"]);
    assert!(first.status.success());
    let dumped = write(dir.path(), "fig5.json", &String::from_utf8_lossy(&first.stdout));
    let second = bin(&["campaign", &dumped, "--dump-config"]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);

    let parsed: resonance_lab::campaign::CampaignConfig = serde_json::from_slice(&first.stdout).unwrap();
    let mut expected = resonance_lab::figures::figure_spec("5").unwrap().campaign;
    expected.integrator.t_end = 2000.0;
    if let resonance_lab::campaign::InitSet::Ball { seed, .. } = &mut expected.inits {
        *seed = 9;
    }
    assert_eq!(parsed.hash(), expected.hash());
}

#[test]
fn analyze_reports_the_shifted_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ex3.json",
        r#"{"family": {"family": "ex3", "params": {"b0": 1.0, "b1": 1.0, "c0": -1.0, "s2": -0.125}}}"#,
    );
    let out = bin(&["analyze", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 1);
    assert_eq!(report["m"], 2);
    let betas: Vec<f64> = report["fixed_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["report"]["beta2"].as_f64().unwrap())
        .collect();
    assert!(betas.iter().any(|b| (b + 0.25).abs() < 1e-6), "{betas:?}");
    assert!(report["closed_form_max_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn average_compares_with_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "avg.json", r#"{"family": {"family": "ex3"}, "r_nodes": [0.8, 1.2], "psi_nodes": 6}"#);
    let grids = dir.path().join("grids");
    let out = bin(&["average", &cfg, "--out", grids.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let order2 = std::fs::read_to_string(grids.join("order2.csv")).unwrap();
    assert!(order2.starts_with("r,psi,lambda_2,omega_2\n"));
    assert_eq!(order2.lines().count(), 1 + 2 * 6);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for entry in summary["closed_form_max_deviation"].as_array().unwrap() {
        assert!(entry["max_abs"].as_f64().unwrap() < 1e-6, "{entry}");
    }
}

#[test]
fn reproduce_figure_needs_an_output_directory() {
    assert_eq!(bin(&["reproduce-figure", "2"]).status.code(), Some(1));
    assert_eq!(bin(&["reproduce-figure", "9", "--out", "x"]).status.code(), Some(1));
}
