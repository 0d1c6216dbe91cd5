//! Draws analytic curves with the SVG emitter: amplitude growth against the
//! `log(t)/2` reference on a logarithmic time axis.
//!
//! cargo run --release --example svg_plot > growth.svg

use resonance_lab::report::{render_svg, AxesSpec, Figure, Panel, Scale, Series};

fn main() -> resonance_lab::Result<()> {
    let growth = Series::from_fn("0.5 log t + 0.3", 1.0, 1e5, 400, true, |t| 0.5 * t.ln() + 0.3 / (1.0 + 1.0 / t));
    let reference = Series::from_fn("log(t)/2", 1.0, 1e5, 100, true, |t| 0.5 * t.ln());
    let fig = Figure {
        config_hash: "example".into(),
        panels: vec![Panel {
            axes: AxesSpec::new("logarithmic growth", "t", "rho", Scale::Log),
            series: vec![growth],
            references: vec![reference],
        }],
    };
    print!("{}", render_svg(&fig)?);
    Ok(())
}
