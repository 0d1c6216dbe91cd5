//! Averages the mixed-order family numerically and compares the first two
//! orders with their closed forms.
//!
//! cargo run --release --example averaging

use resonance_lab::averaging::{average_through_order2, QuadratureSpec};
use resonance_lab::bench::BenchFamily;
use std::collections::BTreeMap;

fn main() -> resonance_lab::Result<()> {
    let fam = BenchFamily::build("ex3", &BTreeMap::new())?;
    let numeric = average_through_order2(&fam.system, QuadratureSpec::default())?;
    let exact = fam.closed_form_field().expect("ex3 is resonant");
    let (n, m) = numeric.indices()?;
    println!("leading indices: n = {n}, m = {m}");

    for k in [1, 2] {
        let mut worst: f64 = 0.0;
        for r in [0.5, 1.0, 1.5, 2.0] {
            for j in 0..12 {
                let psi = -std::f64::consts::PI + j as f64 * std::f64::consts::PI / 6.0;
                let (l, o) = numeric.get(k, r, psi)?;
                let (le, oe) = exact.get_or_zero(k, r, psi)?;
                worst = worst.max((l - le).abs()).max((o - oe).abs());
            }
        }
        println!("order {k}: max |numeric - closed form| = {worst:.2e}");
    }
    print!("{}", numeric.grid_csv(2, &[1.0], &[0.0, 0.5, 1.0])?);
    Ok(())
}
