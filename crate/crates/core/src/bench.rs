//! The three benchmark families: a forced oscillator with `t^(−1)` forcing
//! (`ex1`, also `ex0` off resonance), a parametrically forced oscillator with
//! `t^(−1/2)` forcing (`ex2`), and a mixed `t^(−1/2)`/`t^(−1)` system (`ex3`).
//!
//! Each family carries its closed-form averaged field and the predicted
//! fixed points or drift circle, which serve as oracles for the numerical
//! pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify, DriftReport, FixedPointReport, PredictedState, RegimeClassification, RegimeKind,
};
use crate::averaging::{AveragedField, FieldSource};
use crate::error::{Error, Result};
use crate::model::{
    forced_unit_oscillator, wrap_angle, DrivePhase, ForcingFn, PhaseCorrection, SystemSpec,
};

pub const DEFAULT_R_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Ex1 { a: f64, b: f64, c: f64, s0: f64, s1: f64 },
    Ex2 { b0: f64, b1: f64, c0: f64, c1: f64, s1: f64 },
    Ex3 { b0: f64, b1: f64, c0: f64, s2: f64 },
}

const EX1_KEYS: [&str; 5] = ["a", "b", "c", "s0", "s1"];
const EX2_KEYS: [&str; 5] = ["b0", "b1", "c0", "c1", "s1"];
const EX3_KEYS: [&str; 4] = ["b0", "b1", "c0", "s2"];

impl FamilyParams {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyParams::Ex1 { .. } => "ex1",
            FamilyParams::Ex2 { .. } => "ex2",
            FamilyParams::Ex3 { .. } => "ex3",
        }
    }

    /// Defaults for a family name; `ex0` is `ex1` with pure additive forcing.
    pub fn defaults(name: &str) -> Result<Self> {
        Ok(match name {
            "ex0" => FamilyParams::Ex1 { a: 1.0, b: 0.0, c: 0.0, s0: 1.0, s1: 0.0 },
            "ex1" => FamilyParams::Ex1 { a: 1.0, b: 2.0, c: -1.0, s0: 1.0, s1: 0.0 },
            "ex2" => FamilyParams::Ex2 { b0: 1.5, b1: 1.0, c0: -2.0, c1: -1.0, s1: 0.0 },
            "ex3" => FamilyParams::Ex3 { b0: 1.0, b1: 1.0, c0: -1.0, s2: -0.125 },
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    /// Family defaults overridden by key-value pairs; unknown keys are rejected.
    pub fn from_pairs(name: &str, pairs: &BTreeMap<String, f64>) -> Result<Self> {
        let mut p = Self::defaults(name)?;
        let keys: &[&str] = match p {
            FamilyParams::Ex1 { .. } => &EX1_KEYS,
            FamilyParams::Ex2 { .. } => &EX2_KEYS,
            FamilyParams::Ex3 { .. } => &EX3_KEYS,
        };
        for (k, &v) in pairs {
            if !keys.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "unknown parameter `{k}` for family {name} (expected one of {})",
                    keys.join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::Config(format!("parameter `{k}` must be finite")));
            }
            p.set(k, v);
        }
        Ok(p)
    }

    fn set(&mut self, key: &str, v: f64) {
        match self {
            FamilyParams::Ex1 { a, b, c, s0, s1 } => match key {
                "a" => *a = v,
                "b" => *b = v,
                "c" => *c = v,
                "s0" => *s0 = v,
                _ => *s1 = v,
            },
            FamilyParams::Ex2 { b0, b1, c0, c1, s1 } => match key {
                "b0" => *b0 = v,
                "b1" => *b1 = v,
                "c0" => *c0 = v,
                "c1" => *c1 = v,
                _ => *s1 = v,
            },
            FamilyParams::Ex3 { b0, b1, c0, s2 } => match key {
                "b0" => *b0 = v,
                "b1" => *b1 = v,
                "c0" => *c0 = v,
                _ => *s2 = v,
            },
        }
    }

    pub fn pairs(&self) -> BTreeMap<String, f64> {
        let v: Vec<(&str, f64)> = match *self {
            FamilyParams::Ex1 { a, b, c, s0, s1 } => vec![("a", a), ("b", b), ("c", c), ("s0", s0), ("s1", s1)],
            FamilyParams::Ex2 { b0, b1, c0, c1, s1 } => {
                vec![("b0", b0), ("b1", b1), ("c0", c0), ("c1", c1), ("s1", s1)]
            }
            FamilyParams::Ex3 { b0, b1, c0, s2 } => vec![("b0", b0), ("b1", b1), ("c0", c0), ("s2", s2)],
        };
        v.into_iter().map(|(k, x)| (k.to_string(), x)).collect()
    }

    fn label(&self) -> String {
        let body: Vec<String> = self.pairs().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name(), body.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Lock,
    Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityFlag {
    pub condition: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Prediction {
    Lock {
        fixed_points: Vec<FixedPointReport>,
        classifications: Vec<RegimeClassification>,
    },
    Drift {
        report: DriftReport,
    },
}

/// A fully wired benchmark system.
#[derive(Debug, Clone)]
pub struct BenchFamily {
    pub params: FamilyParams,
    pub system: SystemSpec,
}

impl BenchFamily {
    /// Builds a family from its name and key-value overrides of the defaults.
    pub fn build(name: &str, pairs: &BTreeMap<String, f64>) -> Result<Self> {
        Self::new(FamilyParams::from_pairs(name, pairs)?, DEFAULT_R_MAX)
    }

    pub fn new(params: FamilyParams, r_max: f64) -> Result<Self> {
        let label = params.label();
        let system = match params {
            FamilyParams::Ex1 { a, b, c, s0, s1 } => {
                let z: ForcingFn = Arc::new(move |x, s| (a + b * x + c * x * x) * s.sin());
                let drive = if s1 == 0.0 {
                    DrivePhase::linear(s0, 1)?
                } else {
                    DrivePhase::with_log(s0, 1, s1)?
                };
                forced_unit_oscillator(label, drive, vec![(1, z)], r_max)?
            }
            FamilyParams::Ex2 { b0, b1, c0, c1, s1 } => {
                let z: ForcingFn = Arc::new(move |x, s| {
                    let (bs, cs) = (b0 + b1 * s.sin(), c0 + c1 * s.sin());
                    (bs + cs * x * x) * x
                });
                let corr = if s1 == 0.0 {
                    Vec::new()
                } else {
                    vec![PhaseCorrection { k: 1, s_k: s1 }]
                };
                forced_unit_oscillator(label, DrivePhase::new(2.0, 2, corr)?, vec![(1, z)], r_max)?
            }
            FamilyParams::Ex3 { b0, b1, c0, s2 } => {
                let z1: ForcingFn = Arc::new(move |x, _| (b0 + c0 * x * x) * x);
                let z2: ForcingFn = Arc::new(move |x, s| b1 * x * s.sin());
                let drive = if s2 == 0.0 {
                    DrivePhase::linear(2.0, 2)?
                } else {
                    DrivePhase::with_log(2.0, 2, s2)?
                };
                forced_unit_oscillator(label, drive, vec![(1, z1), (2, z2)], r_max)?
            }
        };
        Ok(Self { params, system })
    }

    pub fn name(&self) -> &'static str {
        self.params.name()
    }

    pub fn q(&self) -> u32 {
        self.system.q()
    }

    pub fn is_resonant(&self) -> bool {
        match self.params {
            FamilyParams::Ex1 { s0, .. } => s0 == 1.0,
            _ => true,
        }
    }

    pub fn validity_flags(&self) -> Vec<ValidityFlag> {
        let flag = |condition: &str, holds: bool| ValidityFlag {
            condition: condition.to_string(),
            holds,
        };
        match self.params {
            FamilyParams::Ex1 { a, c, s0, s1, .. } => vec![
                flag("s0 = 1", s0 == 1.0),
                flag("a c < 0", a * c < 0.0),
                flag("12 s1^2 < |a c|", 12.0 * s1 * s1 < (a * c).abs()),
            ],
            FamilyParams::Ex2 { b0, b1, c0, c1, s1 } => vec![
                flag("2 b0 / b1 = 3 c0 / (2 c1)", ((2.0 * b0 / b1) - 1.5 * c0 / c1).abs() < 1e-12 * (2.0 * b0 / b1).abs().max(1.0)),
                flag("delta > 1", 2.0 * b0 / b1 > 1.0),
                flag("b1 c1 < 0", b1 * c1 < 0.0),
                flag("|b1| > 4 |s1| (lock)", b1.abs() > 4.0 * s1.abs()),
                flag("|b1| < 4 |s1| (drift)", b1.abs() < 4.0 * s1.abs()),
            ],
            FamilyParams::Ex3 { b0, b1, c0, s2 } => vec![
                flag("b0 c0 < 0", b0 * c0 < 0.0),
                flag("|b0^2 + 8 s2| < 4 |b1| (lock)", (b0 * b0 + 8.0 * s2).abs() < 4.0 * b1.abs()),
                flag("|b0^2 + 8 s2| > 4 |b1| (drift)", (b0 * b0 + 8.0 * s2).abs() > 4.0 * b1.abs()),
            ],
        }
    }

    fn flag(&self, prefix: &str) -> bool {
        self.validity_flags()
            .iter()
            .any(|f| f.condition.starts_with(prefix) && f.holds)
    }

    /// Regime implied by the parameters, if they are valid for either.
    pub fn regime(&self) -> Option<Regime> {
        match self.params {
            FamilyParams::Ex1 { .. } => self
                .validity_flags()
                .iter()
                .all(|f| f.holds)
                .then_some(Regime::Lock),
            FamilyParams::Ex2 { .. } => {
                if !(self.flag("2 b0") && self.flag("delta") && self.flag("b1 c1")) {
                    None
                } else if self.flag("|b1| > 4") {
                    Some(Regime::Lock)
                } else if self.flag("|b1| < 4") {
                    Some(Regime::Drift)
                } else {
                    None
                }
            }
            FamilyParams::Ex3 { .. } => {
                if !self.flag("b0 c0") {
                    None
                } else if self.flag("|b0^2 + 8 s2| <") {
                    Some(Regime::Lock)
                } else if self.flag("|b0^2 + 8 s2| >") {
                    Some(Regime::Drift)
                } else {
                    None
                }
            }
        }
    }

    /// Human-readable stability conditions for the family.
    pub fn stability_conditions(&self) -> Vec<String> {
        match self.params {
            FamilyParams::Ex1 { .. } => vec![
                "branch phi* = (-1)^k theta* + pi k is stable if (-1)^k c > 0 and unstable if (-1)^k c < 0".into(),
            ],
            FamilyParams::Ex2 { .. } => vec![
                "lock (|b1| > 4|s1|): branch phi* = theta* + pi k is stable if b1 > 0, all branches unstable if b1 < 0".into(),
                "drift (|b1| < 4|s1|): stable if b1 > 0, unstable if b1 < 0".into(),
            ],
            FamilyParams::Ex3 { .. } => vec![
                "lock: stable if b0 > 0 and b1 sin(2 phi*) > 1/2".into(),
                "drift: stable if b0 > 0, unstable if b0 < 0".into(),
            ],
        }
    }

    /// `ϱ*` from the closed forms.
    pub fn rho_star(&self) -> Option<f64> {
        let r2 = match self.params {
            FamilyParams::Ex1 { a, c, .. } => -4.0 * a / (3.0 * c),
            FamilyParams::Ex2 { b1, c1, .. } => -b1 / c1,
            FamilyParams::Ex3 { b0, c0, .. } => -4.0 * b0 / (3.0 * c0),
        };
        (r2 > 0.0 && r2.is_finite()).then(|| r2.sqrt())
    }

    /// Closed-form averaged field with declared leading indices.
    pub fn closed_form_field(&self) -> Option<AveragedField> {
        let r_max = self.system.r_max;
        match self.params {
            FamilyParams::Ex1 { a, c, s0, s1, .. } => (s0 == 1.0).then(|| {
                AveragedField::new(1, r_max, FieldSource::ClosedForm)
                    .with_closed_form(
                        1,
                        move |r, p| -(4.0 * a + 3.0 * c * r * r) * p.cos() / 8.0,
                        move |r, p| -s1 + (4.0 * a + c * r * r) * p.sin() / (8.0 * r),
                    )
                    .with_indices(1, 1)
            }),
            FamilyParams::Ex2 { b0, b1, c0, c1, s1 } => Some(
                AveragedField::new(2, r_max, FieldSource::ClosedForm)
                    .with_closed_form(
                        1,
                        move |r, p| {
                            r / 8.0 * (4.0 * b0 + 3.0 * c0 * r * r + 2.0 * (b1 + c1 * r * r) * (2.0 * p).sin())
                        },
                        move |r, p| (-4.0 * s1 + (2.0 * b1 + c1 * r * r) * (2.0 * p).cos()) / 8.0,
                    )
                    .with_indices(1, 1),
            ),
            FamilyParams::Ex3 { b0, b1, c0, s2 } => Some(
                AveragedField::new(2, r_max, FieldSource::ClosedForm)
                    .with_closed_form(1, move |r, _| r * (4.0 * b0 + 3.0 * c0 * r * r) / 8.0, |_, _| 0.0)
                    .with_closed_form(
                        2,
                        move |r, p| b1 * r * (2.0 * p).sin() / 4.0,
                        move |r, p| {
                            let r2 = r * r;
                            (-32.0 * b0 * b0 - 48.0 * b0 * c0 * r2 - 27.0 * c0 * c0 * r2 * r2 - 128.0 * s2
                                + 64.0 * b1 * (2.0 * p).cos())
                                / 256.0
                        },
                    )
                    .with_indices(1, 2),
            ),
        }
    }

    /// Predicted fixed points, every branch represented once in `(−π, π]`.
    pub fn predicted_fixed_points(&self) -> Vec<FixedPointReport> {
        let Some(rho) = self.rho_star() else {
            return Vec::new();
        };
        let q = self.q();
        let mut out: Vec<FixedPointReport> = Vec::new();
        let mut push = |phi: f64, (n, m): (u32, u32), jac: [f64; 4]| {
            let phi = wrap_angle(phi);
            if !out.iter().any(|f| crate::model::angle_distance(f.phi_star, phi) < 1e-12) {
                out.push(FixedPointReport::from_jacobian(rho, phi, (n, m, q), jac, (0.0, 0.0)));
            }
        };
        match self.params {
            FamilyParams::Ex1 { a, c, s1, .. } => {
                let theta = (3.0 * s1 * rho / a).asin();
                for phi in [theta, PI - theta] {
                    let jac = [
                        -3.0 * c * rho * phi.cos() / 4.0,
                        0.0,
                        c * phi.sin() / 2.0,
                        -c * rho * phi.cos() / 4.0,
                    ];
                    push(phi, (1, 1), jac);
                }
            }
            FamilyParams::Ex2 { b0, b1, c1, s1, .. } => {
                let delta = 2.0 * b0 / b1;
                let theta = 0.5 * (4.0 * s1 / b1).acos();
                for phi in [theta, theta - PI, -theta, PI - theta] {
                    let s2p = (2.0 * phi).sin();
                    let jac = [
                        -b1 * (delta + s2p) / 2.0,
                        0.0,
                        c1 * rho * (2.0 * phi).cos() / 2.0,
                        -b1 * s2p / 4.0,
                    ];
                    push(phi, (1, 1), jac);
                }
            }
            FamilyParams::Ex3 { b0, b1, c0, s2 } => {
                let theta = 0.5 * ((b0 * b0 + 8.0 * s2) / (4.0 * b1)).acos();
                for phi in [theta, theta - PI, -theta, PI - theta] {
                    let jac = [-b0, 0.0, 3.0 * c0 * b0 * rho / 16.0, -b1 * (2.0 * phi).sin() / 2.0];
                    push(phi, (1, 2), jac);
                }
            }
        }
        out.sort_by(|a, b| a.phi_star.total_cmp(&b.phi_star));
        out
    }

    /// Predicted drift circle diagnostics.
    pub fn predicted_drift(&self) -> Option<DriftReport> {
        let rho = self.rho_star()?;
        let (ell_min, ell_max, omega_min_abs) = match self.params {
            FamilyParams::Ex1 { .. } => return None,
            FamilyParams::Ex2 { b0, b1, s1, .. } => {
                let delta = 2.0 * b0 / b1;
                let (e1, e2) = (-b1 * (delta + 1.0) / 2.0, -b1 * (delta - 1.0) / 2.0);
                (e1.min(e2), e1.max(e2), (4.0 * s1.abs() - b1.abs()) / 8.0)
            }
            FamilyParams::Ex3 { b0, b1, s2, .. } => {
                (-b0, -b0, ((b0 * b0 + 8.0 * s2).abs() - 4.0 * b1.abs()) / 16.0)
            }
        };
        let kind = if ell_max < 0.0 {
            RegimeKind::PhaseDriftStable
        } else if ell_min > 0.0 {
            RegimeKind::PhaseDriftUnstable
        } else {
            RegimeKind::Inconclusive
        };
        Some(DriftReport {
            rho_star: rho,
            ell_min,
            ell_max,
            omega_min_abs,
            lambda_sup: 0.0,
            classification: RegimeClassification {
                kind,
                basis: format!("closed-form drift circle, d/drho Lambda_n in [{ell_min:.6}, {ell_max:.6}]"),
                predicted: PredictedState::Drift { rho_star: rho },
            },
        })
    }

    /// Closed-form prediction for the requested regime.
    pub fn predicted_report(&self, regime: Regime) -> Result<Prediction> {
        let actual = self.regime();
        if actual != Some(regime) {
            return Err(Error::RegimeMismatch(format!(
                "{} parameters {:?} do not satisfy the {regime:?} conditions (implied regime: {actual:?})",
                self.name(),
                self.params.pairs()
            )));
        }
        Ok(match regime {
            Regime::Lock => {
                let fixed_points = self.predicted_fixed_points();
                let classifications = fixed_points.iter().map(classify).collect();
                Prediction::Lock {
                    fixed_points,
                    classifications,
                }
            }
            Regime::Drift => Prediction::Drift {
                report: self.predicted_drift().expect("drift regime implies a drift circle"),
            },
        })
    }

    /// The stable predicted state, if any: the stable lock branch with the
    /// smallest `|φ*|`, or a stable drift circle.
    pub fn stable_prediction(&self) -> Option<PredictedState> {
        match self.predicted_report(self.regime()?).ok()? {
            Prediction::Lock {
                fixed_points,
                classifications,
            } => fixed_points
                .iter()
                .zip(&classifications)
                .filter(|(_, c)| c.kind == RegimeKind::PhaseLockedStable)
                .min_by(|a, b| a.0.phi_star.abs().total_cmp(&b.0.phi_star.abs()))
                .map(|(f, _)| PredictedState::Lock {
                    rho_star: f.rho_star,
                    phi_star: f.phi_star,
                }),
            Prediction::Drift { report } => (report.classification.kind == RegimeKind::PhaseDriftStable)
                .then_some(report.classification.predicted),
        }
    }
}

fn mag(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn sign(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Random parameters satisfying the family's validity conditions for `regime`.
///
/// Magnitudes stay in `[0.5, 2]` so that `ϱ* < 2.4` and all conditions hold
/// with a margin of at least 10%.
pub fn random_params(name: &str, regime: Regime, rng: &mut impl Rng) -> Result<FamilyParams> {
    Ok(match (name, regime) {
        ("ex1", Regime::Lock) => {
            let a = sign(rng) * mag(rng, 0.5, 2.0);
            let c = -a.signum() * mag(rng, 0.5, 2.0);
            let s1_max = (0.8 * (a * c).abs() / 12.0).sqrt();
            FamilyParams::Ex1 {
                a,
                b: mag(rng, -2.0, 2.0),
                c,
                s0: 1.0,
                s1: rng.gen_range(-s1_max..s1_max),
            }
        }
        ("ex2", _) => {
            let b1 = sign(rng) * mag(rng, 0.5, 2.0);
            let c1 = -b1.signum() * mag(rng, 0.5, 2.0);
            let delta = mag(rng, 1.2, 4.0);
            let s1 = match regime {
                Regime::Lock => b1.abs() / 4.0 * rng.gen_range(-0.9..0.9),
                Regime::Drift => sign(rng) * b1.abs() / 4.0 * mag(rng, 1.1, 2.0),
            };
            FamilyParams::Ex2 {
                b0: delta * b1 / 2.0,
                b1,
                c0: 2.0 * delta * c1 / 3.0,
                c1,
                s1,
            }
        }
        ("ex3", _) => {
            let b0 = sign(rng) * mag(rng, 0.5, 2.0);
            let c0 = -b0.signum() * mag(rng, 0.5, 2.0);
            let b1 = sign(rng) * mag(rng, 0.5, 2.0);
            let target = match regime {
                Regime::Lock => 4.0 * b1.abs() * rng.gen_range(-0.9..0.9),
                Regime::Drift => sign(rng) * 4.0 * b1.abs() * mag(rng, 1.1, 2.0),
            };
            FamilyParams::Ex3 {
                b0,
                b1,
                c0,
                s2: (target - b0 * b0) / 8.0,
            }
        }
        ("ex1", Regime::Drift) => {
            return Err(Error::RegimeMismatch("ex1 has no drift regime".into()));
        }
        (other, _) => return Err(Error::UnknownFamily(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{average_order1, rotate, QuadratureSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fam(name: &str, kv: &[(&str, f64)]) -> BenchFamily {
        let pairs = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        BenchFamily::build(name, &pairs).unwrap()
    }

    #[test]
    fn unknown_family_and_key() {
        assert!(matches!(BenchFamily::build("ex9", &BTreeMap::new()), Err(Error::UnknownFamily(_))));
        let bad = [("zeta".to_string(), 1.0)].into_iter().collect();
        assert!(matches!(BenchFamily::build("ex1", &bad), Err(Error::Config(_))));
    }

    #[test]
    fn resonance_data_per_family() {
        for (name, kappa, varkappa) in [("ex1", 1, 1), ("ex2", 1, 2), ("ex3", 1, 2)] {
            let f = fam(name, &[]);
            let r = f.system.resonance().unwrap();
            assert_eq!((r.kappa, r.varkappa), (kappa, varkappa), "{name}");
        }
        assert_eq!(fam("ex2", &[]).q(), 2);
    }

    #[test]
    fn ex1_stable_branch_values() {
        let f = fam("ex1", &[]);
        assert!((f.rho_star().unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        let fps = f.predicted_fixed_points();
        assert_eq!(fps.len(), 2);
        let pi_branch = fps.iter().find(|p| (p.phi_star - PI).abs() < 1e-12).unwrap();
        assert!((pi_branch.lambda_n + 0.86603).abs() < 1e-5);
        assert!((pi_branch.omega_m + 0.28868).abs() < 1e-5);
        assert_eq!(classify(pi_branch).kind, RegimeKind::PhaseLockedStable);
        let zero_branch = fps.iter().find(|p| p.phi_star.abs() < 1e-12).unwrap();
        assert_eq!(classify(zero_branch).kind, RegimeKind::PhaseLockedUnstable);
    }

    #[test]
    fn ex2_drift_and_lock_predictions() {
        let drift = fam("ex2", &[("s1", 0.5)]);
        assert_eq!(drift.regime(), Some(Regime::Drift));
        let Prediction::Drift { report } = drift.predicted_report(Regime::Drift).unwrap() else {
            panic!()
        };
        assert_eq!(report.rho_star, 1.0);
        assert_eq!((report.ell_min, report.ell_max), (-2.0, -1.0));
        assert_eq!(report.classification.kind, RegimeKind::PhaseDriftStable);
        assert!(matches!(drift.predicted_report(Regime::Lock), Err(Error::RegimeMismatch(_))));

        let lock = fam("ex2", &[]);
        let fps = lock.predicted_fixed_points();
        assert_eq!(fps.len(), 4);
        let minus = fps.iter().find(|p| (p.phi_star + PI / 4.0).abs() < 1e-12).unwrap();
        assert!((minus.omega_m - 0.25).abs() < 1e-15);
        assert_eq!(classify(minus).kind, RegimeKind::PhaseLockedUnstable);
        let plus = fps.iter().find(|p| (p.phi_star - PI / 4.0).abs() < 1e-12).unwrap();
        assert_eq!(classify(plus).kind, RegimeKind::PhaseLockedStable);
    }

    #[test]
    fn ex3_lock_beta() {
        let f = fam("ex3", &[]);
        assert_eq!(f.regime(), Some(Regime::Lock));
        let fps = f.predicted_fixed_points();
        let p = fps.iter().find(|p| (p.phi_star - PI / 4.0).abs() < 1e-12).unwrap();
        assert!((p.beta1 + 1.0).abs() < 1e-15);
        assert!((p.beta2 + 0.25).abs() < 1e-15);
        assert_eq!(classify(p).kind, RegimeKind::PhaseLockedStable);
        assert_eq!(f.stable_prediction(), Some(PredictedState::Lock { rho_star: p.rho_star, phi_star: p.phi_star }));
    }

    #[test]
    fn off_resonance_has_no_prediction() {
        let f = fam("ex0", &[("s0", 2f64.sqrt())]);
        assert!(!f.is_resonant());
        assert!(f.closed_form_field().is_none());
        assert!(f.regime().is_none());
        assert!(f.system.resonance().is_err());
    }

    #[test]
    fn random_draws_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            for (name, regime) in [("ex1", Regime::Lock), ("ex2", Regime::Lock), ("ex2", Regime::Drift), ("ex3", Regime::Lock), ("ex3", Regime::Drift)] {
                let p = random_params(name, regime, &mut rng).unwrap();
                let f = BenchFamily::new(p, DEFAULT_R_MAX).unwrap();
                assert_eq!(f.regime(), Some(regime), "{p:?}");
                assert!(f.rho_star().unwrap() < DEFAULT_R_MAX);
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature_spot_check() {
        for name in ["ex1", "ex2", "ex3"] {
            let f = fam(name, &[]);
            let cf = f.closed_form_field().unwrap();
            let q = average_order1(&rotate(&f.system).unwrap(), QuadratureSpec::default()).unwrap();
            for &(r, p) in &[(0.7, 0.3), (1.5, -2.0), (2.2, 2.9)] {
                let (a, b) = cf.get(1, r, p).unwrap();
                let (c, d) = q.get(1, r, p).unwrap();
                assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12, "{name} {r} {p}");
            }
        }
    }
}
