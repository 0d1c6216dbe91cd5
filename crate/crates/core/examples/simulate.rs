//! Integrates one trajectory of the parametrically forced oscillator and
//! prints the amplitude and phase shift at a few times.
//!
//! cargo run --release --example simulate

use resonance_lab::bench::BenchFamily;
use resonance_lab::integrate::{integrate, InitialState, IntegratorConfig};
use std::collections::BTreeMap;

fn main() -> resonance_lab::Result<()> {
    let fam = BenchFamily::build("ex2", &BTreeMap::new())?;
    let cfg = IntegratorConfig {
        t_end: 1e4,
        ..IntegratorConfig::default()
    };
    let rec = integrate(&fam.system, InitialState::Shift { rho: 1.2, theta: -2.0 }, &cfg)?;

    println!("{}: {} samples, {} rejected steps", fam.system.name, rec.samples.len(), rec.meta.rejected_steps);
    for target in [1.0, 10.0, 100.0, 1e3, 1e4] {
        let s = rec.samples.iter().find(|s| s.t >= target).unwrap_or_else(|| rec.last().unwrap());
        println!("t = {:>8.1}  rho = {:.6}  theta = {:+.6}", s.t, s.rho, s.theta);
    }
    Ok(())
}
