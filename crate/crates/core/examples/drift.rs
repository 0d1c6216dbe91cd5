//! Detects the drift circle of the parametrically forced oscillator when the
//! phase correction is too strong for locking, then checks it by simulation.
//!
//! cargo run --release --example drift

use resonance_lab::analysis::detect_drift;
use resonance_lab::averaging::{average_through_order2, QuadratureSpec};
use resonance_lab::bench::BenchFamily;
use resonance_lab::campaign::{detect_regime, DetectorWindows};
use resonance_lab::integrate::{integrate, InitialState, IntegratorConfig};
use std::collections::BTreeMap;

fn main() -> resonance_lab::Result<()> {
    let pairs = BTreeMap::from([("s1".to_string(), 0.5)]);
    let fam = BenchFamily::build("ex2", &pairs)?;
    let avg = average_through_order2(&fam.system, QuadratureSpec::default())?;
    let (n, m) = avg.indices()?;

    for d in detect_drift(&avg, n, m, &[1.0]) {
        println!(
            "drift circle rho* = {:.8}, Lambda' in [{:.4}, {:.4}], min |Omega| = {:.4}: {:?}",
            d.rho_star, d.ell_min, d.ell_max, d.omega_min_abs, d.classification.kind
        );
    }

    let cfg = IntegratorConfig {
        t_end: 1e5,
        record_stride: 10,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&fam.system, InitialState::Shift { rho: 1.3, theta: 0.0 }, &cfg)?;
    println!("{:?}", detect_regime(&rec, &DetectorWindows::default())?);
    Ok(())
}
