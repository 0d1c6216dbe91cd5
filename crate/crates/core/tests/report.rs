//! Figure reproductions written to disk.

use std::f64::consts::PI;

use resonance_lab::figures::{figure_spec, reproduce_figure};
use resonance_lab::integrate::TrajectoryRecord;

#[test]
fn figure2_csv_tails_sit_on_the_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let out = reproduce_figure(&figure_spec("2").unwrap(), dir.path()).unwrap();
    let text = std::fs::read_to_string(out.dir.join("traj_000.csv")).unwrap();
    let rec = TrajectoryRecord::from_csv(&text).unwrap();
    for s in rec.samples.iter().rev().take(100) {
        assert!((s.rho - 2.0 / 3f64.sqrt()).abs() < 0.02);
    }
    let svg = std::fs::read_to_string(&out.svg).unwrap();
    assert!(svg.contains(&format!("config-hash: {}", out.summary.config_hash)));
    assert!(svg.contains("<title>1.154701</title>"));
}

#[test]
fn figure4_theta_panel_has_the_shifted_reference() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = figure_spec("4").unwrap();
    spec.campaign.integrator.t_end = 2e3;
    let out = reproduce_figure(&spec, dir.path()).unwrap();
    let svg = std::fs::read_to_string(&out.svg).unwrap();
    let label = format!("<title>{:.6}</title>", PI / 4.0 - PI);
    let dashed = svg.lines().filter(|l| l.contains("stroke-dasharray")).collect::<Vec<_>>();
    assert_eq!(dashed.len(), 2);
    assert!(dashed.iter().any(|l| l.contains(&label)));
    assert_eq!(svg.matches("<polyline").count(), 2 * 5 + 2);
}

#[test]
fn figure1c_draws_log_reference_on_log_axis() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = figure_spec("1c").unwrap();
    spec.campaign.integrator.t_end = 1e3;
    let out = reproduce_figure(&spec, dir.path()).unwrap();
    let svg = std::fs::read_to_string(&out.svg).unwrap();
    assert!(svg.contains("<title>log(t)/2</title>"));
    assert!(svg.contains(">1e3</text>"));
    assert!(!svg.contains("theta"));
}
