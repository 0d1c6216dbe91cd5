//! Reproduces one published figure (default `4`) as CSVs plus an SVG.
//!
//! cargo run --release --example figure -- 5 runs/

use resonance_lab::figures::{figure_spec, reproduce_figure};
use std::path::PathBuf;

fn main() -> resonance_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "4".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs".into()));
    let mut spec = figure_spec(&id)?;
    spec.campaign.integrator.t_end = 1e4;
    let res = reproduce_figure(&spec, &out)?;
    println!("{}", res.svg.display());
    for (verdict, count) in &res.summary.verdicts {
        println!("{verdict}: {count}");
    }
    Ok(())
}
