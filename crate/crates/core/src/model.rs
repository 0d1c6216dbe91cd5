//! Perturbed isochronous systems in the plane.
//!
//! The unperturbed motion is uniform rotation `ϱ' = 0`, `φ' = ω` on the plane
//! `(x₁, x₂) = (ϱ cos φ, −ϱ sin φ)`. Perturbations are power series in
//! `t^(−1/q)` whose coefficients are 2π-periodic in the phase `φ` and in the
//! drive phase `S(t)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient evaluator `(ϱ, φ, S) -> value`.
pub type TermFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Direct right-hand side `(x₁, x₂, t) -> (ẋ₁, ẋ₂)`.
pub type CartesianRhs = Arc<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>;

/// Forcing coefficient `(x₂, S) -> value` of a unit oscillator.
pub type ForcingFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// One correction `s_k t^(−k/q)` of the drive frequency `S'(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCorrection {
    pub k: u32,
    pub s_k: f64,
}

/// Drive phase `S(t)` with `S'(t) = s₀ + Σ s_k t^(−k/q)`.
///
/// `S` is the exact antiderivative of the series (with zero constant), so the
/// `k = q` term contributes `s_q log t` and all others `s_k t^(1−k/q)/(1−k/q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivePhase {
    pub s0: f64,
    pub q: u32,
    pub corrections: Vec<PhaseCorrection>,
}

impl DrivePhase {
    pub fn new(s0: f64, q: u32, corrections: Vec<PhaseCorrection>) -> Result<Self> {
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::InvalidParameter(format!("s0 must be positive, got {s0}")));
        }
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        if corrections.iter().any(|c| c.k == 0 || !c.s_k.is_finite()) {
            return Err(Error::InvalidParameter(
                "phase corrections need k >= 1 and finite s_k".into(),
            ));
        }
        Ok(Self { s0, q, corrections })
    }

    /// `S(t) = s₀ t`.
    pub fn linear(s0: f64, q: u32) -> Result<Self> {
        Self::new(s0, q, Vec::new())
    }

    /// `S(t) = s₀ t + coeff · log t`, i.e. `s_q = coeff`.
    pub fn with_log(s0: f64, q: u32, coeff: f64) -> Result<Self> {
        Self::new(s0, q, vec![PhaseCorrection { k: q, s_k: coeff }])
    }

    /// Coefficient `s_k` (zero when absent).
    pub fn s_coeff(&self, k: u32) -> f64 {
        self.corrections
            .iter()
            .filter(|c| c.k == k)
            .map(|c| c.s_k)
            .sum()
    }

    pub fn phase(&self, t: f64) -> f64 {
        let q = f64::from(self.q);
        let mut s = self.s0 * t;
        for c in &self.corrections {
            if c.k == self.q {
                s += c.s_k * t.ln();
            } else {
                let e = 1.0 - f64::from(c.k) / q;
                s += c.s_k * t.powf(e) / e;
            }
        }
        s
    }

    pub fn rate(&self, t: f64) -> f64 {
        let q = f64::from(self.q);
        self.s0
            + self
                .corrections
                .iter()
                .map(|c| c.s_k * t.powf(-f64::from(c.k) / q))
                .sum::<f64>()
    }
}

/// Coprime integers `κ`, `ϰ` with `κ s₀ = ϰ ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceData {
    pub kappa: i64,
    pub varkappa: i64,
    pub omega: f64,
}

impl ResonanceData {
    /// Validates coprimality and the resonance relation against `drive`.
    pub fn new(kappa: i64, varkappa: i64, omega: f64, drive: &DrivePhase) -> Result<Self> {
        if kappa <= 0 || varkappa <= 0 {
            return Err(Error::InvalidParameter("kappa and varkappa must be positive".into()));
        }
        if gcd(kappa, varkappa) != 1 {
            return Err(Error::InvalidParameter(format!(
                "kappa = {kappa} and varkappa = {varkappa} are not coprime"
            )));
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        let lhs = kappa as f64 * drive.s0;
        let rhs = varkappa as f64 * omega;
        if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
            return Err(Error::NoResonance { s0: drive.s0, omega });
        }
        Ok(Self {
            kappa,
            varkappa,
            omega,
        })
    }

    /// `κ/ϰ`, the rotation rate of the resonant frame relative to `S`.
    pub fn ratio(&self) -> f64 {
        self.kappa as f64 / self.varkappa as f64
    }

    /// Period of the rotating-frame coefficients in `S`.
    pub fn s_period(&self) -> f64 {
        2.0 * PI * self.varkappa as f64
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.abs()
}

pub const DEFAULT_MAX_DENOMINATOR: i64 = 64;
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

/// Detects `κ s₀ = ϰ ω` by continued-fraction expansion of `s₀/ω = ϰ/κ`.
pub fn check_resonance(drive: &DrivePhase, omega: f64) -> Result<ResonanceData> {
    check_resonance_with(drive, omega, DEFAULT_MAX_DENOMINATOR, DEFAULT_RESONANCE_TOL)
}

pub fn check_resonance_with(
    drive: &DrivePhase,
    omega: f64,
    max_denominator: i64,
    tol: f64,
) -> Result<ResonanceData> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    let x = drive.s0 / omega;
    let no = || Error::NoResonance {
        s0: drive.s0,
        omega,
    };
    // Convergents p/r of x; p plays ϰ and r plays κ.
    let (mut p_prev, mut p) = (1_i64, x.floor() as i64);
    let (mut r_prev, mut r) = (0_i64, 1_i64);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if r > max_denominator || p > i64::MAX / 4 {
            return Err(no());
        }
        if p > 0 && (x - p as f64 / r as f64).abs() <= tol * x.max(1.0) {
            return Ok(ResonanceData {
                kappa: r,
                varkappa: p,
                omega,
            });
        }
        if frac < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i64;
        let p_next = a.saturating_mul(p).saturating_add(p_prev);
        let r_next = a.saturating_mul(r).saturating_add(r_prev);
        p_prev = p;
        p = p_next;
        r_prev = r;
        r = r_next;
    }
    Err(no())
}

/// Coefficients `f_k`, `g_k` of `t^(−k/q)` in the amplitude and phase rates.
#[derive(Clone)]
pub struct PerturbationTerm {
    pub k: u32,
    pub f: TermFn,
    pub g: TermFn,
}

impl fmt::Debug for PerturbationTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationTerm").field("k", &self.k).finish_non_exhaustive()
    }
}

impl PerturbationTerm {
    pub fn new(
        k: u32,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            k,
            f: Arc::new(f),
            g: Arc::new(g),
        }
    }
}

/// A perturbed isochronous system.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: String,
    pub drive: DrivePhase,
    pub omega: f64,
    /// `None` for off-resonant drives, which can be simulated but not averaged.
    pub resonance: Option<ResonanceData>,
    pub terms: Vec<PerturbationTerm>,
    pub r_max: f64,
    pub cartesian_rhs: Option<CartesianRhs>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("drive", &self.drive)
            .field("omega", &self.omega)
            .field("resonance", &self.resonance)
            .field("terms", &self.terms)
            .field("r_max", &self.r_max)
            .field("cartesian_rhs", &self.cartesian_rhs.is_some())
            .finish()
    }
}

impl SystemSpec {
    /// Builds a system, detecting resonance from `drive.s0` and `omega`.
    pub fn new(
        name: impl Into<String>,
        drive: DrivePhase,
        omega: f64,
        terms: Vec<PerturbationTerm>,
        r_max: f64,
    ) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::InvalidParameter(format!("R_max must be positive, got {r_max}")));
        }
        if terms.windows(2).any(|w| w[0].k >= w[1].k) {
            return Err(Error::InvalidParameter(
                "perturbation term indices must be strictly increasing".into(),
            ));
        }
        if terms.first().is_some_and(|t| t.k == 0) {
            return Err(Error::InvalidParameter("term indices start at 1".into()));
        }
        let resonance = check_resonance(&drive, omega).ok();
        Ok(Self {
            name: name.into(),
            drive,
            omega,
            resonance,
            terms,
            r_max,
            cartesian_rhs: None,
        })
    }

    pub fn with_cartesian_rhs(mut self, rhs: CartesianRhs) -> Self {
        self.cartesian_rhs = Some(rhs);
        self
    }

    pub fn q(&self) -> u32 {
        self.drive.q
    }

    pub fn resonance(&self) -> Result<&ResonanceData> {
        self.resonance.as_ref().ok_or(Error::NoResonance {
            s0: self.drive.s0,
            omega: self.omega,
        })
    }

    /// Rate of the reference frame used for the phase shift `θ = φ − c S(t)`:
    /// `κ/ϰ` under resonance, `ω/s₀` otherwise.
    pub fn frame_ratio(&self) -> f64 {
        match &self.resonance {
            Some(r) => r.ratio(),
            None => self.omega / self.drive.s0,
        }
    }

    pub fn term(&self, k: u32) -> Option<&PerturbationTerm> {
        self.terms.iter().find(|t| t.k == k)
    }

    /// Polar right-hand side `(ϱ', φ')` summed over all terms.
    pub fn polar_rates(&self, rho: f64, phi: f64, t: f64) -> (f64, f64) {
        let s = self.drive.phase(t);
        let q = f64::from(self.drive.q);
        let mut dr = 0.0;
        let mut dphi = self.omega;
        for term in &self.terms {
            let w = t.powf(-f64::from(term.k) / q);
            dr += w * (term.f)(rho, phi, s);
            dphi += w * (term.g)(rho, phi, s);
        }
        (dr, dphi)
    }
}

/// Builds `ẋ₁ = x₂`, `ẋ₂ = −x₁ + Σ t^(−k/q) P_k(x₂, S(t))` together with its
/// polar decomposition `f_k = −sin φ P_k(−ϱ sin φ, S)`,
/// `g_k = −ϱ⁻¹ cos φ P_k(−ϱ sin φ, S)`.
pub fn forced_unit_oscillator(
    name: impl Into<String>,
    drive: DrivePhase,
    forcing: Vec<(u32, ForcingFn)>,
    r_max: f64,
) -> Result<SystemSpec> {
    let terms = forcing
        .iter()
        .map(|(k, p)| {
            let pf = Arc::clone(p);
            let pg = Arc::clone(p);
            PerturbationTerm::new(
                *k,
                move |rho, phi, s| -phi.sin() * pf(-rho * phi.sin(), s),
                move |rho, phi, s| -phi.cos() * pg(-rho * phi.sin(), s) / rho,
            )
        })
        .collect();
    let sys = SystemSpec::new(name, drive.clone(), 1.0, terms, r_max)?;
    let q = f64::from(drive.q);
    let rhs: CartesianRhs = Arc::new(move |x1, x2, t| {
        let s = drive.phase(t);
        let force: f64 = forcing
            .iter()
            .map(|(k, p)| t.powf(-f64::from(*k) / q) * p(x2, s))
            .sum();
        (x2, -x1 + force)
    });
    Ok(sys.with_cartesian_rhs(rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub rho: f64,
    pub phi: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
}

/// `ϱ = √(x₁² + x₂²)`, `φ = −atan2(x₂, x₁)` in `(−π, π]`.
pub fn to_polar(s: CartesianState) -> Result<PolarState> {
    let rho = s.x1.hypot(s.x2);
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::PhaseUndefined);
    }
    Ok(PolarState {
        rho,
        phi: wrap_angle(-s.x2.atan2(s.x1)),
        t: s.t,
    })
}

pub fn to_cartesian(p: PolarState) -> CartesianState {
    CartesianState {
        x1: p.rho * p.phi.cos(),
        x2: -p.rho * p.phi.sin(),
        t: p.t,
    }
}
