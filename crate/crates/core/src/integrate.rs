//! Adaptive Dormand–Prince 5(4) integration of the full non-autonomous system.
//!
//! The phase is unwrapped at every accepted step, so the recorded phase shift
//! `θ = φ − c S(t)` is continuous regardless of how far the output is thinned.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::config_hash;
use crate::model::{to_polar, wrap_angle, CartesianState, PolarState, SystemSpec};

/// Which form of the equations is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Cartesian when the system provides a direct right-hand side, polar otherwise.
    #[default]
    Auto,
    Cartesian,
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; `None` picks one from the right-hand side.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub record_stride: usize,
    /// Disables step-size control when set.
    pub fixed_step: Option<f64>,
    pub rho_floor: f64,
    pub coordinates: Coordinates,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            h_init: None,
            h_max: 0.5,
            t_start: 1.0,
            t_end: 1e3,
            record_stride: 1,
            fixed_step: None,
            rho_floor: 1e-6,
            coordinates: Coordinates::Auto,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.t_start > 0.0) {
            return bad(format!("t_start must be positive, got {}", self.t_start));
        }
        if !(self.t_end > self.t_start) {
            return bad(format!(
                "t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            ));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.h_max > 0.0) {
            return bad("h_max must be positive".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1".into());
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) {
                return bad("fixed_step must be positive".into());
            }
        }
        Ok(())
    }
}

/// Initial data at `t_start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Cartesian { x1: f64, x2: f64 },
    Polar { rho: f64, phi: f64 },
    /// Amplitude and phase shift `θ`; the phase is `φ = θ + c S(t_start)`.
    Shift { rho: f64, theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub rho: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainExit {
    pub t: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub system: String,
    pub config_hash: String,
    pub initial: Option<InitialState>,
    /// `c` in `θ = φ − c S(t)`.
    pub frame_ratio: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub exit: Option<DomainExit>,
    pub meta: RecordMeta,
}

pub const CSV_HEADER: &str = "t,x1,x2,rho,theta";

impl TrajectoryRecord {
    pub fn from_samples(samples: Vec<Sample>) -> Self {
        Self {
            samples,
            exit: None,
            meta: RecordMeta {
                system: String::new(),
                config_hash: String::new(),
                initial: None,
                frame_ratio: 1.0,
                accepted_steps: 0,
                rejected_steps: 0,
            },
        }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 120 + 32);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.x1, s.x2, s.rho, s.theta
            );
        }
        out
    }

    /// Parses samples from CSV; metadata is left empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::Csv {
                    line: 1,
                    msg: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let mut samples = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Csv {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            if vals.len() != 5 {
                return Err(Error::Csv {
                    line: i + 1,
                    msg: format!("expected 5 fields, got {}", vals.len()),
                });
            }
            samples.push(Sample {
                t: vals[0],
                x1: vals[1],
                x2: vals[2],
                rho: vals[3],
                theta: vals[4],
            });
        }
        Ok(Self::from_samples(samples))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub t: f64,
    /// Representative in `[−π, π)`.
    pub principal: f64,
    pub winding: i64,
}

/// Splits the unwrapped phase shift into a principal value and a winding count
/// with `θ = principal + 2π·winding`.
pub fn resample_theta(rec: &TrajectoryRecord) -> Vec<ThetaSample> {
    rec.samples
        .iter()
        .map(|s| {
            let winding = ((s.theta + PI) / (2.0 * PI)).floor() as i64;
            ThetaSample {
                t: s.t,
                principal: s.theta - 2.0 * PI * winding as f64,
                winding,
            }
        })
        .collect()
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type V2 = [f64; 2];

#[inline]
fn axpy(y: V2, terms: &[(f64, &V2)], h: f64) -> V2 {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

struct StepResult {
    y: V2,
    k_last: V2,
    err: f64,
}

fn dopri_step(
    rhs: &dyn Fn(f64, V2) -> V2,
    t: f64,
    y: V2,
    k1: V2,
    h: f64,
    cfg: &IntegratorConfig,
) -> StepResult {
    let k2 = rhs(t + C2 * h, axpy(y, &[(A21, &k1)], h));
    let k3 = rhs(t + C3 * h, axpy(y, &[(A31, &k1), (A32, &k2)], h));
    let k4 = rhs(t + C4 * h, axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = rhs(
        t + C5 * h,
        axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    );
    let k6 = rhs(
        t + h,
        axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    );
    let y_new = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = rhs(t + h, y_new);
    let mut err: f64 = 0.0;
    for i in 0..2 {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / scale).abs());
    }
    StepResult {
        y: y_new,
        k_last: k7,
        err,
    }
}

fn initial_step(rhs: &dyn Fn(f64, V2) -> V2, t: f64, y: V2, k1: V2, cfg: &IntegratorConfig) -> f64 {
    let sc = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs();
    let d0 = (0..2).map(|i| (y[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..2).map(|i| (k1[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, &[(1.0, &k1)], h0);
    let k2 = rhs(t + h0, y1);
    let d2 = (0..2)
        .map(|i| ((k2[i] - k1[i]) / sc(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.h_max)
}

/// Integrates `sys` from `cfg.t_start` to `cfg.t_end`.
///
/// Leaving the domain (`ϱ > R_max`, or `ϱ ≤ ρ_floor` in polar form) ends the
/// run early with a recorded [`DomainExit`]; it is not an error.
pub fn integrate(
    sys: &SystemSpec,
    init: InitialState,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let coords = match cfg.coordinates {
        Coordinates::Auto if sys.cartesian_rhs.is_some() => Coordinates::Cartesian,
        Coordinates::Auto => Coordinates::Polar,
        c => c,
    };
    if coords == Coordinates::Cartesian && sys.cartesian_rhs.is_none() {
        return Err(Error::Config(format!(
            "system `{}` has no Cartesian right-hand side",
            sys.name
        )));
    }
    let t0 = cfg.t_start;
    let frame = sys.frame_ratio();
    let s_at = |t: f64| sys.drive.phase(t);

    // Initial polar data with an unwrapped phase.
    let (rho0, phi0) = match init {
        InitialState::Cartesian { x1, x2 } => {
            let p = to_polar(CartesianState { x1, x2, t: t0 })?;
            (p.rho, p.phi)
        }
        InitialState::Polar { rho, phi } => (rho, phi),
        InitialState::Shift { rho, theta } => (rho, theta + frame * s_at(t0)),
    };
    if !(rho0 > 0.0) || !rho0.is_finite() || !phi0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "initial amplitude must be positive and finite, got {rho0}"
        )));
    }
    if coords == Coordinates::Polar && !(rho0 > cfg.rho_floor && rho0 < sys.r_max) {
        return Err(Error::InvalidParameter(format!(
            "initial amplitude {rho0} outside ({}, {})",
            cfg.rho_floor, sys.r_max
        )));
    }

    let y0: V2 = match coords {
        Coordinates::Polar => [rho0, phi0],
        _ => [rho0 * phi0.cos(), -rho0 * phi0.sin()],
    };

    let cart = sys.cartesian_rhs.clone();
    let rhs: Box<dyn Fn(f64, V2) -> V2 + '_> = match coords {
        Coordinates::Polar => Box::new(|t, y: V2| {
            let (a, b) = sys.polar_rates(y[0], y[1], t);
            [a, b]
        }),
        _ => {
            let f = cart.expect("checked above");
            Box::new(move |t, y: V2| {
                let (a, b) = f(y[0], y[1], t);
                [a, b]
            })
        }
    };

    let mut phi_unwrapped = phi0;
    let to_sample = |t: f64, y: V2, phi_u: f64| -> Sample {
        match coords {
            Coordinates::Polar => Sample {
                t,
                x1: y[0] * y[1].cos(),
                x2: -y[0] * y[1].sin(),
                rho: y[0],
                theta: y[1] - frame * s_at(t),
            },
            _ => Sample {
                t,
                x1: y[0],
                x2: y[1],
                rho: y[0].hypot(y[1]),
                theta: phi_u - frame * s_at(t),
            },
        }
    };

    let mut samples = vec![to_sample(t0, y0, phi_unwrapped)];
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, y);
    let mut h = match (cfg.fixed_step, cfg.h_init) {
        (Some(h), _) => h,
        (None, Some(h)) => h.min(cfg.h_max),
        (None, None) => initial_step(&*rhs, t, y, k1, cfg),
    };
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut since_record = 0usize;
    let mut exit = None;
    let mut last_recorded = true;

    while t < cfg.t_end {
        let mut h_try = match cfg.fixed_step {
            // Node times stay exact multiples of the step.
            Some(hf) => (t0 + (accepted + 1) as f64 * hf - t).min(cfg.t_end - t),
            None => h.min(cfg.t_end - t),
        };
        let last = t + h_try >= cfg.t_end;
        if last {
            h_try = cfg.t_end - t;
        }
        let step = dopri_step(&*rhs, t, y, k1, h_try, cfg);
        if !step.y[0].is_finite() || !step.y[1].is_finite() {
            return Err(Error::NonFinite { t: t + h_try });
        }
        let accept = cfg.fixed_step.is_some() || step.err <= 1.0;
        if !accept {
            rejected += 1;
            let factor = (0.9 * step.err.powf(-0.2)).clamp(0.2, 1.0);
            h = h_try * factor;
            if h < 1e-12 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }

        t = if last { cfg.t_end } else { t + h_try };
        y = step.y;
        k1 = step.k_last;
        accepted += 1;
        since_record += 1;
        last_recorded = false;

        if coords != Coordinates::Polar {
            let principal = (-y[1]).atan2(y[0]);
            phi_unwrapped += wrap_angle(principal - phi_unwrapped);
        }
        let rho = match coords {
            Coordinates::Polar => y[0],
            _ => y[0].hypot(y[1]),
        };
        let left = rho > sys.r_max || (coords == Coordinates::Polar && rho <= cfg.rho_floor);
        if left {
            samples.push(to_sample(t, y, phi_unwrapped));
            exit = Some(DomainExit { t, rho });
            last_recorded = true;
            break;
        }
        if since_record >= cfg.record_stride {
            samples.push(to_sample(t, y, phi_unwrapped));
            since_record = 0;
            last_recorded = true;
        }
        if cfg.fixed_step.is_none() {
            let factor = if step.err == 0.0 {
                5.0
            } else {
                (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h_try * factor).min(cfg.h_max);
        }
    }
    if !last_recorded {
        samples.push(to_sample(t, y, phi_unwrapped));
    }

    #[derive(Serialize)]
    struct HashInput<'a> {
        system: &'a str,
        config: &'a IntegratorConfig,
        initial: &'a InitialState,
    }
    let config_hash = config_hash(&HashInput {
        system: &sys.name,
        config: cfg,
        initial: &init,
    });

    Ok(TrajectoryRecord {
        samples,
        exit,
        meta: RecordMeta {
            system: sys.name.clone(),
            config_hash,
            initial: Some(init),
            frame_ratio: frame,
            accepted_steps: accepted,
            rejected_steps: rejected,
        },
    })
}

/// Converts an initial state given at time `t` to polar form.
pub fn initial_polar(sys: &SystemSpec, init: InitialState, t: f64) -> Result<PolarState> {
    match init {
        InitialState::Cartesian { x1, x2 } => to_polar(CartesianState { x1, x2, t }),
        InitialState::Polar { rho, phi } => Ok(PolarState { rho, phi, t }),
        InitialState::Shift { rho, theta } => Ok(PolarState {
            rho,
            phi: theta + sys.frame_ratio() * sys.drive.phase(t),
            t,
        }),
    }
}
