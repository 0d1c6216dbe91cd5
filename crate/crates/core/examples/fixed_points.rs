//! Finds the resonant fixed points of the forced Duffing-type family,
//! classifies them and builds the Lyapunov form of the stable branch.
//!
//! cargo run --release --example fixed_points

use resonance_lab::analysis::{asymptotic_correction, classify, find_fixed_points, LyapunovForm};
use resonance_lab::averaging::{average_through_order2, QuadratureSpec};
use resonance_lab::bench::BenchFamily;
use std::collections::BTreeMap;

fn main() -> resonance_lab::Result<()> {
    let fam = BenchFamily::build("ex1", &BTreeMap::new())?;
    let avg = average_through_order2(&fam.system, QuadratureSpec::default())?;
    let (n, m) = avg.indices()?;

    for fp in find_fixed_points(&avg, n, m)? {
        let class = classify(&fp);
        println!(
            "rho* = {:.8}  phi* = {:+.8}  beta = ({:+.4}, {:+.4})  {:?}",
            fp.rho_star, fp.phi_star, fp.beta1, fp.beta2, class.kind
        );
        println!("    {}", class.basis);
        if let Ok(c) = asymptotic_correction(&avg, &fp) {
            println!("    correction: rho ~ rho* + {:.6}/t, phi ~ phi* + {:.6}/t", c.xi1, c.zeta1);
        }
        if let Ok(form) = LyapunovForm::build(&fp) {
            println!("    L = {:.4} a^2 + t^{} b^2 + {:.4} a b", form.c1, form.exponent, form.c2);
        }
    }
    Ok(())
}
