//! Canned campaigns for the six published figures and their SVG rendering.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::campaign::{
    run_campaign, write_run_directory, CampaignConfig, Containment, DetectorWindows, FamilySpec,
    InitSet,
};
use crate::error::{Error, Result};
use crate::integrate::{InitialState, IntegratorConfig};
use crate::report::{emit_svg, AxesSpec, Figure, Panel, Scale, Series};

pub const FIGURE_IDS: [&str; 8] = ["1a", "1b", "1c", "2", "3", "4", "5", "6"];

/// Dashed reference curve drawn on a panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    Constant { value: f64 },
    HalfLog,
}

impl Reference {
    fn series(&self, t0: f64, t1: f64) -> Series {
        match *self {
            Reference::Constant { value } => Series::new(format!("{value:.6}"), vec![(t0, value), (t1, value)]),
            Reference::HalfLog => Series::from_fn("log(t)/2", t0, t1, 200, true, |t| 0.5 * t.ln()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub id: String,
    pub title: String,
    pub campaign: CampaignConfig,
    pub rho_references: Vec<Reference>,
    /// `None` omits the phase panel.
    pub theta_references: Option<Vec<Reference>>,
}

fn ball(rho: f64, theta: f64, seed: u64) -> InitSet {
    InitSet::Ball {
        rho,
        theta,
        radius: 0.3,
        count: 5,
        seed,
    }
}

fn amplitudes() -> InitSet {
    InitSet::Explicit {
        states: [0.5, 1.0, 1.5, 2.0, 2.5]
            .iter()
            .map(|&rho| InitialState::Shift { rho, theta: 0.0 })
            .collect(),
    }
}

/// Campaign and reference curves for a figure id (`1a`, `1b`, `1c`, `2`..`6`).
pub fn figure_spec(id: &str) -> Result<FigureSpec> {
    let ex1 = |c: f64, s0: f64| FamilySpec::new("ex1", &[("a", 1.0), ("b", 2.0), ("c", c), ("s0", s0), ("s1", 0.0)]);
    let ex2 = |s1: f64| FamilySpec::new("ex2", &[("b0", 1.5), ("b1", 1.0), ("c0", -2.0), ("c1", -1.0), ("s1", s1)]);
    let ex3 = |s2: f64| FamilySpec::new("ex3", &[("b0", 1.0), ("b1", 1.0), ("c0", -1.0), ("s2", s2)]);
    let c = |value: f64| Reference::Constant { value };
    let (title, family, inits, rho_refs, theta_refs, predict) = match id {
        "1a" => ("ex1, c = 0, s0 = 1", ex1(0.0, 1.0), amplitudes(), vec![Reference::HalfLog], None, false),
        "1b" => ("ex1, c = 0, s0 = sqrt 2", ex1(0.0, 2f64.sqrt()), amplitudes(), vec![Reference::HalfLog], None, false),
        "1c" => ("ex1, c = -1, s0 = 1", ex1(-1.0, 1.0), amplitudes(), vec![Reference::HalfLog], None, true),
        "2" => ("ex1, a = 1, b = 2, c = -1", ex1(-1.0, 1.0), ball(2.0 / 3f64.sqrt(), -PI, 2), vec![c(2.0 / 3f64.sqrt())], Some(vec![c(-PI)]), true),
        "3" => ("ex2, s1 = 1/2", ex2(0.5), ball(1.0, 0.0, 3), vec![c(1.0)], Some(vec![]), true),
        "4" => ("ex2, s1 = 0", ex2(0.0), ball(1.0, PI / 4.0 - PI, 4), vec![c(1.0)], Some(vec![c(PI / 4.0 - PI)]), true),
        "5" => ("ex3, s2 = -1/8", ex3(-0.125), ball(2.0 / 3f64.sqrt(), PI / 4.0 - PI, 5), vec![c(2.0 / 3f64.sqrt())], Some(vec![c(PI / 4.0 - PI)]), true),
        "6" => ("ex3, s2 = 2", ex3(2.0), ball(2.0 / 3f64.sqrt(), 0.0, 6), vec![c(2.0 / 3f64.sqrt())], Some(vec![]), true),
        other => return Err(Error::Config(format!("unknown figure `{other}`; expected one of {FIGURE_IDS:?}"))),
    };
    let detector = if id == "6" {
        // The log-rate drift winds by about ln(10) per decade.
        DetectorWindows { drift_min_change: 1.0, ..DetectorWindows::default() }
    } else {
        DetectorWindows::default()
    };
    Ok(FigureSpec {
        id: id.to_string(),
        title: format!("Figure {id}: {title}"),
        campaign: CampaignConfig {
            family,
            inits,
            integrator: IntegratorConfig {
                t_end: 1e5,
                record_stride: 50,
                ..IntegratorConfig::default()
            },
            detector,
            containment: predict.then(Containment::default),
            predict,
        },
        rho_references: rho_refs,
        theta_references: theta_refs,
    })
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub dir: PathBuf,
    pub svg: PathBuf,
    pub summary: crate::campaign::CampaignSummary,
}

/// Runs the figure's campaign and writes CSVs, `summary.json` and an SVG
/// into `<out>/fig<id>/<config hash>/`.
pub fn reproduce_figure(spec: &FigureSpec, out: &Path) -> Result<FigureOutput> {
    let result = run_campaign(&spec.campaign)?;
    let dir = write_run_directory(&result, &out.join(format!("fig{}", spec.id)))?;
    let (t0, t1) = (spec.campaign.integrator.t_start, spec.campaign.integrator.t_end);
    let records: Vec<_> = result.records.iter().flatten().collect();
    let mut panels = vec![Panel {
        axes: AxesSpec::new(&spec.title, "t", "rho", Scale::Log),
        series: records.iter().enumerate().map(|(i, r)| Series::rho(r, format!("init {i}"))).collect(),
        references: spec.rho_references.iter().map(|r| r.series(t0, t1)).collect(),
    }];
    if let Some(refs) = &spec.theta_references {
        panels.push(Panel {
            axes: AxesSpec::new("", "t", "theta", Scale::Log),
            series: records.iter().enumerate().map(|(i, r)| Series::theta(r, format!("init {i}"))).collect(),
            references: refs.iter().map(|r| r.series(t0, t1)).collect(),
        });
    }
    let svg = dir.join(format!("fig{}.svg", spec.id));
    emit_svg(
        &Figure {
            config_hash: result.summary.config_hash.clone(),
            panels,
        },
        &svg,
    )?;
    Ok(FigureOutput {
        dir,
        svg,
        summary: result.summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_has_a_valid_spec() {
        for id in FIGURE_IDS {
            let spec = figure_spec(id).unwrap();
            spec.campaign.family.build().unwrap();
            spec.campaign.integrator.validate().unwrap();
        }
        assert!(figure_spec("7").is_err());
    }

    #[test]
    fn figure_hashes_differ() {
        let mut hashes: Vec<String> = FIGURE_IDS.iter().map(|id| figure_spec(id).unwrap().campaign.hash()).collect();
        hashes.sort();
        hashes.dedup();
        assert_eq!(hashes.len(), FIGURE_IDS.len());
    }
}
