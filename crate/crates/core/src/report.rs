//! CSV and SVG output.
//!
//! Figures are rendered by hand as SVG 1.1 polylines so that identical inputs
//! produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::campaign::CampaignSummary;
use crate::error::{Error, Result};
use crate::integrate::TrajectoryRecord;

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a trajectory record as CSV.
pub fn emit_csv(rec: &TrajectoryRecord, path: &Path) -> Result<()> {
    write_file(path, &rec.to_csv())
}

/// Writes a campaign summary as pretty-printed JSON.
pub fn emit_summary(summary: &CampaignSummary, path: &Path) -> Result<()> {
    write_file(path, &(summary.to_json()? + "\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    /// Samples `f` on `n` points of `[a, b]`, geometrically spaced when `log` is set.
    pub fn from_fn(label: impl Into<String>, a: f64, b: f64, n: usize, log: bool, f: impl Fn(f64) -> f64) -> Self {
        let pts = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1).max(1) as f64;
                let x = if log { a * (b / a).powf(s) } else { a + (b - a) * s };
                (x, f(x))
            })
            .collect();
        Self::new(label, pts)
    }

    pub fn rho(rec: &TrajectoryRecord, label: impl Into<String>) -> Self {
        Self::new(label, rec.samples.iter().map(|s| (s.t, s.rho)).collect())
    }

    pub fn theta(rec: &TrajectoryRecord, label: impl Into<String>) -> Self {
        Self::new(label, rec.samples.iter().map(|s| (s.t, s.theta)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxesSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    /// Fixed y range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
}

impl AxesSpec {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale,
            y_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub axes: AxesSpec,
    pub series: Vec<Series>,
    /// Drawn dashed.
    pub references: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub config_hash: String,
    pub panels: Vec<Panel>,
}

const PANEL_W: f64 = 560.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;
/// Longest polyline emitted per series; longer series are thinned by stride.
const MAX_POINTS: usize = 4000;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Shortest decimal form that is stable across runs.
fn fmt_num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let p = 10f64.powf(raw.log10().floor());
    let f = raw / p;
    p * if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    }
}

struct Mapped {
    points: Vec<(f64, f64)>,
    dropped: usize,
}

fn finite_points(s: &Series, scale: Scale) -> Mapped {
    let mut dropped = 0;
    let mut points = Vec::with_capacity(s.points.len());
    for &(x, y) in &s.points {
        let xv = match scale {
            Scale::Linear => x,
            Scale::Log => x.log10(),
        };
        if xv.is_finite() && y.is_finite() {
            points.push((xv, y));
        } else {
            dropped += 1;
        }
    }
    if points.len() > MAX_POINTS {
        let stride = points.len().div_ceil(MAX_POINTS);
        let last = points[points.len() - 1];
        points = points.into_iter().step_by(stride).collect();
        if points.last() != Some(&last) {
            points.push(last);
        }
    }
    Mapped { points, dropped }
}

fn render_panel(out: &mut String, panel: &Panel, y0: f64) -> usize {
    let scale = panel.axes.x_scale;
    let series: Vec<Mapped> = panel.series.iter().map(|s| finite_points(s, scale)).collect();
    let refs: Vec<Mapped> = panel.references.iter().map(|s| finite_points(s, scale)).collect();
    let dropped = series.iter().chain(&refs).map(|m| m.dropped).sum();

    let all = || series.iter().chain(&refs).flat_map(|m| m.points.iter());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = all().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if let Some((a, b)) = panel.axes.y_range {
        (ymin, ymax) = (a, b);
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad = 0.05 * (ymax - ymin);
    if panel.axes.y_range.is_none() {
        ymin -= pad;
        ymax += pad;
    }
    let (pl, pr) = (MARGIN_L, PANEL_W - MARGIN_R);
    let (pt, pb) = (y0 + MARGIN_T, y0 + PANEL_H - MARGIN_B);
    let sx = |x: f64| pl + (x - xmin) / (xmax - xmin) * (pr - pl);
    let sy = |y: f64| pb - (y - ymin) / (ymax - ymin) * (pb - pt);

    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        fmt_num(pl),
        fmt_num(pt),
        fmt_num(pr - pl),
        fmt_num(pb - pt)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        fmt_num((pl + pr) / 2.0),
        fmt_num(y0 + 20.0),
        escape(&panel.axes.title)
    );
    // x ticks
    match scale {
        Scale::Log => {
            let mut k = xmin.ceil();
            while k <= xmax + 1e-9 {
                tick_x(out, sx(k), pb, &format!("1e{}", k as i64));
                k += 1.0;
            }
        }
        Scale::Linear => {
            let step = nice_step(xmax - xmin);
            let mut v = (xmin / step).ceil() * step;
            while v <= xmax + 1e-9 * step {
                tick_x(out, sx(v), pb, &tick_label(v));
                v += step;
            }
        }
    }
    let step = nice_step(ymax - ymin);
    let mut v = (ymin / step).ceil() * step;
    while v <= ymax + 1e-9 * step {
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000"/><text x="{3}" y="{4}" text-anchor="end" font-size="11">{5}</text>"##,
            fmt_num(pl - 5.0),
            fmt_num(y),
            fmt_num(pl),
            fmt_num(pl - 8.0),
            fmt_num(y + 4.0),
            tick_label(if v.abs() < 1e-12 * step { 0.0 } else { v })
        );
        v += step;
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        fmt_num((pl + pr) / 2.0),
        fmt_num(pb + 36.0),
        escape(&panel.axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {0})">{1}</text>"#,
        fmt_num((pt + pb) / 2.0),
        escape(&panel.axes.y_label)
    );

    let _ = writeln!(
        out,
        r#"<clipPath id="clip{0}"><rect x="{1}" y="{2}" width="{3}" height="{4}"/></clipPath><g clip-path="url(#clip{0})">"#,
        fmt_num(y0),
        fmt_num(pl),
        fmt_num(pt),
        fmt_num(pr - pl),
        fmt_num(pb - pt)
    );
    let polyline = |out: &mut String, m: &Mapped, label: &str, style: &str| {
        if m.points.is_empty() {
            return;
        }
        let pts: Vec<String> = m
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_num(sx(x)), fmt_num(sy(y))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" {style} points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(label)
        );
    };
    for (i, (m, s)) in series.iter().zip(&panel.series).enumerate() {
        let style = format!(r#"stroke="{}" stroke-width="1.2""#, PALETTE[i % PALETTE.len()]);
        polyline(out, m, &s.label, &style);
    }
    for (m, s) in refs.iter().zip(&panel.references) {
        polyline(out, m, &s.label, r##"stroke="#000" stroke-width="1.2" stroke-dasharray="6 4""##);
    }
    out.push_str("</g>\n");
    dropped
}

fn tick_x(out: &mut String, x: f64, pb: f64, label: &str) {
    let _ = writeln!(
        out,
        r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000"/><text x="{0}" y="{3}" text-anchor="middle" font-size="11">{4}</text>"##,
        fmt_num(x),
        fmt_num(pb),
        fmt_num(pb + 5.0),
        fmt_num(pb + 18.0),
        escape(label)
    );
}

/// Renders the figure to an SVG string.
pub fn render_svg(fig: &Figure) -> Result<String> {
    if fig.panels.iter().all(|p| p.series.is_empty()) {
        return Err(Error::InvalidParameter("a figure needs at least one series".into()));
    }
    let height = PANEL_H * fig.panels.len() as f64;
    let mut body = String::new();
    let mut dropped = 0;
    for (i, p) in fig.panels.iter().enumerate() {
        dropped += render_panel(&mut body, p, i as f64 * PANEL_H);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">
<metadata>config-hash: {}</metadata>
<!-- dropped non-finite points: {} -->
<rect width="100%" height="100%" fill="#fff"/>"##,
        fmt_num(PANEL_W),
        fmt_num(height),
        fmt_num(PANEL_W),
        fmt_num(height),
        escape(&fig.config_hash),
        dropped
    );
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(fig: &Figure, path: &Path) -> Result<()> {
    write_file(path, &render_svg(fig)?)
}
