//! Runs a small ensemble around the stable lock of the forced Duffing-type
//! family and compares the observed regimes with the analysis.
//!
//! cargo run --release --example campaign [out_dir]

use resonance_lab::campaign::{run_campaign, write_run_directory, CampaignConfig, Containment, DetectorWindows, FamilySpec, InitSet};
use resonance_lab::integrate::IntegratorConfig;

fn main() -> resonance_lab::Result<()> {
    let cfg = CampaignConfig {
        family: FamilySpec::new("ex1", &[("a", 1.0), ("b", 2.0), ("c", -1.0)]),
        inits: InitSet::Ball {
            rho: 2.0 / 3f64.sqrt(),
            theta: -std::f64::consts::PI,
            radius: 0.3,
            count: 6,
            seed: 11,
        },
        integrator: IntegratorConfig {
            t_start: 10.0,
            t_end: 2e4,
            record_stride: 20,
            ..IntegratorConfig::default()
        },
        detector: DetectorWindows::default(),
        containment: Some(Containment::default()),
        predict: true,
    };
    let result = run_campaign(&cfg)?;
    let s = &result.summary;
    if let Some(p) = &s.prediction {
        println!("prediction: n = {}, m = {}, stable state {:?}", p.n, p.m, p.stable);
    }
    for o in &s.outcomes {
        let label = o.observation.map(|v| v.label()).unwrap_or_else(|| "none".into());
        println!("init {} -> {label}, final rho {:.5}", o.index, o.final_rho.unwrap_or(f64::NAN));
    }
    println!("contained: {}/{}", s.contained, s.eligible);
    if let Some(out) = std::env::args().nth(1) {
        println!("wrote {}", write_run_directory(&result, out.as_ref())?.display());
    }
    Ok(())
}
