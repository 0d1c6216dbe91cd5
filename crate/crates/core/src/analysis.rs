//! Resonant fixed points of the limiting system, their stability parameters
//! and classification, phase-drift detection, the first asymptotic
//! correction and a numerical monitor for the quadratic Lyapunov form.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{AveragedField, NULL_TOL};
use crate::error::{Error, Result};
use crate::integrate::Sample;
use crate::model::{angle_distance, wrap_angle};

pub const FP_TOL: f64 = 1e-10;
pub const DEGENERATE_TOL: f64 = 1e-8;
pub const DEFECTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }
}

/// Fixed point of the limiting system with its linearization data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub rho_star: f64,
    /// Representative in `(−π, π]`.
    pub phi_star: f64,
    pub n: u32,
    pub m: u32,
    pub q: u32,
    pub lambda_n: f64,
    pub nu_n: f64,
    pub eta_m: f64,
    pub omega_m: f64,
    pub det_d: f64,
    pub alpha1: Complex,
    pub alpha2: Complex,
    pub beta1: f64,
    pub beta2: f64,
    pub defective: bool,
    pub degenerate: bool,
    pub residual_lambda: f64,
    pub residual_omega: f64,
}

fn kron(a: u32, b: u32) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

impl FixedPointReport {
    /// Fills the effective eigenvalues and decay-corrected exponents from the
    /// Jacobian entries `(λ_n, ν_n, η_m, ω_m)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_jacobian(
        rho_star: f64,
        phi_star: f64,
        (n, m, q): (u32, u32, u32),
        [lambda_n, nu_n, eta_m, omega_m]: [f64; 4],
        residuals: (f64, f64),
    ) -> Self {
        let det_d = lambda_n * omega_m - nu_n * eta_m;
        let degenerate = det_d.abs() < DEGENERATE_TOL;
        let mut defective = false;
        let (alpha1, alpha2) = if n == m {
            let tr = lambda_n + omega_m;
            let disc = tr * tr - 4.0 * det_d;
            if disc.abs() < DEFECTIVE_TOL {
                defective = true;
                (Complex::real(tr / 2.0), Complex::real(tr / 2.0))
            } else if disc > 0.0 {
                let s = disc.sqrt();
                (Complex::real((tr + s) / 2.0), Complex::real((tr - s) / 2.0))
            } else {
                let s = (-disc).sqrt() / 2.0;
                (
                    Complex { re: tr / 2.0, im: s },
                    Complex { re: tr / 2.0, im: -s },
                )
            }
        } else if n < m {
            (Complex::real(lambda_n), Complex::real(det_d / lambda_n))
        } else {
            (Complex::real(det_d / omega_m), Complex::real(omega_m))
        };
        let (beta1, beta2) = if n == m {
            (alpha1.re, alpha2.re)
        } else {
            let (nf, mf, qf) = (f64::from(n), f64::from(m), f64::from(q));
            (
                alpha1.re + (nf - mf) / (2.0 * qf) * kron(n, q),
                alpha2.re + (mf - nf) / (2.0 * qf) * kron(m, q),
            )
        };
        Self {
            rho_star,
            phi_star: wrap_angle(phi_star),
            n,
            m,
            q,
            lambda_n,
            nu_n,
            eta_m,
            omega_m,
            det_d,
            alpha1,
            alpha2,
            beta1,
            beta2,
            defective,
            degenerate: degenerate || !alpha1.re.is_finite() || !alpha2.re.is_finite(),
            residual_lambda: residuals.0,
            residual_omega: residuals.1,
        }
    }

    /// `A(ϱ*, φ*, 1)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.lambda_n, self.nu_n], [self.eta_m, self.omega_m]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeKind {
    PhaseLockedStable,
    PhaseLockedUnstable,
    PhaseDriftStable,
    PhaseDriftUnstable,
    Degenerate,
    Inconclusive,
}

impl RegimeKind {
    pub fn is_stable(self) -> bool {
        matches!(self, RegimeKind::PhaseLockedStable | RegimeKind::PhaseDriftStable)
    }
}

/// What the classification predicts the trajectory tends to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictedState {
    Lock { rho_star: f64, phi_star: f64 },
    Drift { rho_star: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub kind: RegimeKind,
    pub basis: String,
    pub predicted: PredictedState,
}

/// Sign-table classification of a resonant fixed point.
pub fn classify(fp: &FixedPointReport) -> RegimeClassification {
    let predicted = PredictedState::Lock {
        rho_star: fp.rho_star,
        phi_star: fp.phi_star,
    };
    let out = |kind, basis: String| RegimeClassification {
        kind,
        basis,
        predicted,
    };
    if fp.degenerate {
        return out(
            RegimeKind::Degenerate,
            format!("|D| = {:.3e} below the degeneracy tolerance", fp.det_d.abs()),
        );
    }
    let persistent = fp.beta1 > 0.0 && fp.beta2 > 0.0 && fp.n.max(fp.m) < fp.q;
    if fp.n == fp.m {
        if fp.defective {
            let a0 = fp.alpha1.re;
            return if a0 < 0.0 {
                out(
                    RegimeKind::PhaseLockedStable,
                    format!("n = m, defective linearization with double eigenvalue {a0:.6} < 0"),
                )
            } else if a0 > 0.0 {
                out(
                    RegimeKind::PhaseLockedUnstable,
                    format!(
                        "n = m, defective linearization with double eigenvalue {a0:.6} > 0; {}",
                        persistence_note(persistent)
                    ),
                )
            } else {
                out(RegimeKind::Inconclusive, "n = m, zero double eigenvalue".into())
            };
        }
        let (r1, r2) = (fp.alpha1.re, fp.alpha2.re);
        if r1 < 0.0 && r2 < 0.0 {
            out(
                RegimeKind::PhaseLockedStable,
                format!("n = m, Re alpha = ({r1:.6}, {r2:.6}) both negative"),
            )
        } else if r1 > 0.0 || r2 > 0.0 {
            out(
                RegimeKind::PhaseLockedUnstable,
                format!(
                    "n = m, Re alpha = ({r1:.6}, {r2:.6}) has a positive entry; {}",
                    persistence_note(persistent)
                ),
            )
        } else {
            out(
                RegimeKind::Inconclusive,
                format!("n = m, Re alpha = ({r1:.6}, {r2:.6}) on the imaginary axis"),
            )
        }
    } else if fp.beta1 < 0.0 && fp.beta2 < 0.0 {
        out(
            RegimeKind::PhaseLockedStable,
            format!("n != m, beta = ({:.6}, {:.6}) both negative", fp.beta1, fp.beta2),
        )
    } else if fp.alpha1.re > 0.0 && fp.alpha2.re > 0.0 && fp.n.max(fp.m) < fp.q {
        out(
            RegimeKind::PhaseLockedUnstable,
            format!(
                "n != m, alpha = ({:.6}, {:.6}) both positive and max(n, m) < q",
                fp.alpha1.re, fp.alpha2.re
            ),
        )
    } else {
        out(
            RegimeKind::Inconclusive,
            format!(
                "n != m, alpha = ({:.6}, {:.6}), beta = ({:.6}, {:.6}): no stability clause applies",
                fp.alpha1.re, fp.alpha2.re, fp.beta1, fp.beta2
            ),
        )
    }
}

fn persistence_note(persistent: bool) -> &'static str {
    if persistent {
        "instability persists in the full system (beta > 0, max(n, m) < q)"
    } else {
        "instability shown for the limiting system only"
    }
}

/// Newton search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub psi_seeds: usize,
    pub rho_seeds: usize,
    /// Fractional offset of the seed grid, in units of one grid cell.
    pub seed_offset: f64,
    pub fp_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            psi_seeds: 24,
            rho_seeds: 16,
            seed_offset: 0.5,
            fp_tol: FP_TOL,
            max_iter: 50,
            fd_step: 1e-6,
        }
    }
}

fn eval_nm(avg: &AveragedField, n: u32, m: u32, r: f64, psi: f64) -> Option<[f64; 2]> {
    let v = if n == m {
        let (l, o) = avg.get(n, r, psi).ok()?;
        [l, o]
    } else {
        [avg.lambda(n, r, psi).ok()?, avg.omega(m, r, psi).ok()?]
    };
    (v[0].is_finite() && v[1].is_finite()).then_some(v)
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

fn newton(avg: &AveragedField, n: u32, m: u32, mut x: [f64; 2], cfg: &NewtonConfig) -> Option<[f64; 2]> {
    let inside = |x: [f64; 2]| x[0] > 0.0 && x[0] <= avg.r_max;
    let mut f = eval_nm(avg, n, m, x[0], x[1])?;
    for _ in 0..cfg.max_iter {
        if norm(f) < cfg.fp_tol {
            return Some([x[0], wrap_angle(x[1])]);
        }
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = cfg.fd_step * x[c].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            if !inside(xm) {
                return None;
            }
            let fp = eval_nm(avg, n, m, xp[0], xp[1])?;
            let fm = eval_nm(avg, n, m, xm[0], xm[1])?;
            for r in 0..2 {
                jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        // Backtracking on the max-norm residual.
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..12 {
            let xn = [x[0] + step * dx[0], x[1] + step * dx[1]];
            if inside(xn) {
                if let Some(fn_) = eval_nm(avg, n, m, xn[0], xn[1]) {
                    if norm(fn_) < norm(f) {
                        next = Some((xn, fn_));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let (xn, fn_) = next?;
        x = xn;
        f = fn_;
    }
    (norm(f) < cfg.fp_tol).then(|| [x[0], wrap_angle(x[1])])
}

/// Fourth-order central differences of `(Λ_n, Ω_m)` at a point.
pub fn jacobian_entries(avg: &AveragedField, n: u32, m: u32, r: f64, psi: f64) -> Result<[f64; 4]> {
    let h = 1e-5 * r.abs().max(1.0);
    let at = |dr: f64, dp: f64| -> Result<[f64; 2]> {
        eval_nm(avg, n, m, r + dr, psi + dp)
            .ok_or(Error::NonFiniteIntegrand { r: r + dr, psi: psi + dp, s: f64::NAN })
    };
    let d = |e: [f64; 2]| -> Result<[f64; 2]> {
        let (m2, m1, p1, p2) = (at(-2.0 * e[0], -2.0 * e[1])?, at(-e[0], -e[1])?, at(e[0], e[1])?, at(2.0 * e[0], 2.0 * e[1])?);
        Ok([0, 1].map(|k| (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h)))
    };
    let dr = d([h, 0.0])?;
    let dp = d([0.0, h])?;
    Ok([dr[0], dp[0], dr[1], dp[1]])
}

/// Report for a known fixed point of `(Λ_n, Ω_m)`.
pub fn report_at(avg: &AveragedField, n: u32, m: u32, r: f64, psi: f64) -> Result<FixedPointReport> {
    let res = eval_nm(avg, n, m, r, psi).ok_or(Error::NonFiniteIntegrand { r, psi, s: f64::NAN })?;
    let jac = jacobian_entries(avg, n, m, r, psi)?;
    Ok(FixedPointReport::from_jacobian(
        r,
        psi,
        (n, m, avg.q),
        jac,
        (res[0].abs(), res[1].abs()),
    ))
}

/// Roots of `(Λ_n, Ω_m)` from a seed grid, deduplicated modulo `2π`.
pub fn find_fixed_points(avg: &AveragedField, n: u32, m: u32) -> Result<Vec<FixedPointReport>> {
    find_fixed_points_with(avg, n, m, &NewtonConfig::default())
}

pub fn find_fixed_points_with(
    avg: &AveragedField,
    n: u32,
    m: u32,
    cfg: &NewtonConfig,
) -> Result<Vec<FixedPointReport>> {
    let seeds: Vec<[f64; 2]> = (0..cfg.rho_seeds)
        .flat_map(|i| {
            (0..cfg.psi_seeds).map(move |j| {
                let r = avg.r_max * (i as f64 + cfg.seed_offset) / cfg.rho_seeds as f64;
                let p = -PI + 2.0 * PI * (j as f64 + cfg.seed_offset) / cfg.psi_seeds as f64;
                [r, p]
            })
        })
        .collect();
    let hits: Vec<Option<[f64; 2]>> = seeds.par_iter().map(|&s| newton(avg, n, m, s, cfg)).collect();

    let mut unique: Vec<[f64; 2]> = Vec::new();
    for x in hits.into_iter().flatten() {
        let dup = unique
            .iter()
            .any(|u| (u[0] - x[0]).abs() < 1e-8 && angle_distance(u[1], x[1]) < 1e-8);
        if !dup {
            unique.push(x);
        }
    }
    unique.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
    unique
        .into_iter()
        .map(|[r, p]| report_at(avg, n, m, r, p))
        .collect()
}

/// Drift-circle diagnostics at a candidate amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub rho_star: f64,
    pub ell_min: f64,
    pub ell_max: f64,
    pub omega_min_abs: f64,
    pub lambda_sup: f64,
    pub classification: RegimeClassification,
}

impl DriftReport {
    pub fn holds(&self) -> bool {
        self.lambda_sup < NULL_TOL && self.ell_min * self.ell_max > 0.0 && self.omega_min_abs > 0.0
    }
}

const DRIFT_GRID: usize = 256;

fn psi_grid() -> impl Iterator<Item = f64> {
    (0..DRIFT_GRID).map(|j| -PI + 2.0 * PI * j as f64 / DRIFT_GRID as f64)
}

fn mean_lambda(avg: &AveragedField, n: u32, r: f64) -> Option<f64> {
    let mut acc = 0.0;
    for p in psi_grid().step_by(4) {
        acc += avg.lambda(n, r, p).ok()?;
    }
    Some(acc / (DRIFT_GRID / 4) as f64)
}

fn bisect(f: impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Candidate amplitudes where `Λ_n(ϱ, ·)` may vanish identically: sign changes of
/// its `ψ`-mean on `(0, R_max]`.
pub fn drift_candidates(avg: &AveragedField, n: u32) -> Vec<f64> {
    let nodes = 400;
    let rs: Vec<f64> = (1..=nodes).map(|i| avg.r_max * i as f64 / nodes as f64).collect();
    let vals: Vec<Option<f64>> = rs.par_iter().map(|&r| mean_lambda(avg, n, r)).collect();
    let mut out = Vec::new();
    for i in 0..nodes - 1 {
        if let (Some(a), Some(b)) = (vals[i], vals[i + 1]) {
            if a == 0.0 {
                out.push(rs[i]);
            } else if a * b < 0.0 {
                if let Some(r) = bisect(|r| mean_lambda(avg, n, r), rs[i], rs[i + 1], a) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Checks each candidate circle `ϱ = ϱ*` for an identically vanishing `Λ_n`
/// with a sign-definite `Ω_m`, and classifies by the sign of `∂_ϱ Λ_n`.
pub fn detect_drift(avg: &AveragedField, n: u32, m: u32, seeds: &[f64]) -> Vec<DriftReport> {
    let mut cands = drift_candidates(avg, n);
    cands.extend(seeds.iter().copied().filter(|r| *r > 0.0 && *r <= avg.r_max));
    let mut reports: Vec<DriftReport> = Vec::new();
    for r in cands {
        if reports.iter().any(|d| (d.rho_star - r).abs() < 1e-8) {
            continue;
        }
        if let Some(rep) = drift_report(avg, n, m, r) {
            reports.push(rep);
        }
    }
    reports
}

fn drift_report(avg: &AveragedField, n: u32, m: u32, r: f64) -> Option<DriftReport> {
    let h = 1e-5 * r.max(1.0);
    let mut lambda_sup: f64 = 0.0;
    let mut ell_min = f64::INFINITY;
    let mut ell_max = f64::NEG_INFINITY;
    let mut om_min = f64::INFINITY;
    let mut om_max = f64::NEG_INFINITY;
    for p in psi_grid() {
        let l = avg.lambda(n, r, p).ok()?;
        lambda_sup = lambda_sup.max(l.abs());
        if lambda_sup >= NULL_TOL {
            return None;
        }
        let lv = |dr: f64| avg.lambda(n, r + dr, p).ok();
        let ell = (lv(-2.0 * h)? - 8.0 * lv(-h)? + 8.0 * lv(h)? - lv(2.0 * h)?) / (12.0 * h);
        ell_min = ell_min.min(ell);
        ell_max = ell_max.max(ell);
        let o = avg.omega(m, r, p).ok()?;
        om_min = om_min.min(o);
        om_max = om_max.max(o);
    }
    if om_min * om_max <= 0.0 {
        // Ω_m has a zero on the circle: locking, not drift.
        return None;
    }
    let omega_min_abs = om_min.abs().min(om_max.abs());
    let (kind, basis) = if ell_max < 0.0 {
        (RegimeKind::PhaseDriftStable, format!("Lambda_n vanishes on rho = {r:.9}, d/drho Lambda_n in [{ell_min:.6}, {ell_max:.6}] < 0, |Omega_m| >= {omega_min_abs:.6}"))
    } else if ell_min > 0.0 {
        (RegimeKind::PhaseDriftUnstable, format!("Lambda_n vanishes on rho = {r:.9}, d/drho Lambda_n in [{ell_min:.6}, {ell_max:.6}] > 0"))
    } else {
        (RegimeKind::Inconclusive, format!("Lambda_n vanishes on rho = {r:.9} but d/drho Lambda_n changes sign"))
    };
    Some(DriftReport {
        rho_star: r,
        ell_min,
        ell_max,
        omega_min_abs,
        lambda_sup,
        classification: RegimeClassification {
            kind,
            basis,
            predicted: PredictedState::Drift { rho_star: r },
        },
    })
}

/// First coefficients of the shifted equilibrium `ϱ* + t^(−1/q) ξ₁`, `φ* + t^(−1/q) ζ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCorrection {
    pub xi1: f64,
    pub zeta1: f64,
    pub residual: f64,
}

/// Solves for `(ξ₁, ζ₁)` by balancing the `t^(−(n+1)/q)` terms.
///
/// For `max(n, m) < q` the balance is `−A (ξ₁, ζ₁)ᵀ = (Λ_{n+1}, Ω_{m+1})ᵀ`. When
/// `n = m = q` the derivative of `t^(−1/q)` enters at the same order and the
/// system becomes `−(A + I/q)(ξ₁, ζ₁)ᵀ = (Λ_{n+1}, Ω_{m+1})ᵀ`.
pub fn asymptotic_correction(avg: &AveragedField, fp: &FixedPointReport) -> Result<AsymptoticCorrection> {
    let (n, m, q) = (fp.n, fp.m, fp.q);
    let shift = if n.max(m) < q {
        0.0
    } else if n == q && m == q {
        1.0 / f64::from(q)
    } else {
        return Err(Error::UnsupportedBranch(format!(
            "n = {n}, m = {m}, q = {q} leads to logarithmic terms"
        )));
    };
    let f1 = avg.get_or_zero(n + 1, fp.rho_star, fp.phi_star)?.0;
    let g1 = avg.get_or_zero(m + 1, fp.rho_star, fp.phi_star)?.1;
    let a = fp.matrix();
    let b = [[-(a[0][0] + shift), -a[0][1]], [-a[1][0], -(a[1][1] + shift)]];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    if det.abs() < DEGENERATE_TOL {
        return Err(Error::Degenerate(det));
    }
    let xi1 = (f1 * b[1][1] - b[0][1] * g1) / det;
    let zeta1 = (b[0][0] * g1 - b[1][0] * f1) / det;
    let residual = (b[0][0] * xi1 + b[0][1] * zeta1 - f1)
        .abs()
        .max((b[1][0] * xi1 + b[1][1] * zeta1 - g1).abs());
    Ok(AsymptoticCorrection { xi1, zeta1, residual })
}

/// `L(y₁, y₂, t) = C₁ a² + t^e b² + C₂ a b` with `(a, b) = (y₁, y₂)`, or
/// `(y₂, y₁)` when `swapped` (the `n > m` case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovForm {
    pub c1: f64,
    pub c2: f64,
    pub exponent: f64,
    pub swapped: bool,
}

impl LyapunovForm {
    pub fn build(fp: &FixedPointReport) -> Result<Self> {
        let (n, m, q) = (fp.n, fp.m, fp.q);
        // Orient so that the first variable carries the faster (smaller-index) decay.
        let swapped = n > m;
        let (lam, nu, eta, om, lo, hi) = if swapped {
            (fp.omega_m, fp.eta_m, fp.nu_n, fp.lambda_n, m, n)
        } else {
            (fp.lambda_n, fp.nu_n, fp.eta_m, fp.omega_m, n, m)
        };
        if lam == 0.0 {
            return Err(Error::LyapunovConstruction("leading diagonal entry vanishes".into()));
        }
        let corr = kron(hi, q) * f64::from(hi - lo) / (2.0 * f64::from(q));
        let om_t = om + corr;
        let alpha2_t = fp.det_d / lam + corr;
        // Numerical derivatives leave round-off in an entry that vanishes exactly.
        let scale = lam.abs().max(om.abs()).max(eta.abs()).max(1.0);
        let nu = if nu.abs() <= 1e-8 * scale { 0.0 } else { nu };
        let c1 = if nu == 0.0 {
            lam * om_t
        } else {
            lam * alpha2_t / (2.0 * nu * nu)
        };
        if !(c1 > 0.0) {
            return Err(Error::LyapunovConstruction(format!(
                "C1 = {c1:.6e} is not positive (beta = {:.6}, {:.6})",
                fp.beta1, fp.beta2
            )));
        }
        let c2 = -(2.0 * c1 * nu + 2.0 * eta) / lam;
        Ok(Self {
            c1,
            c2,
            exponent: f64::from(hi - lo) / f64::from(q),
            swapped,
        })
    }

    pub fn eval(&self, y1: f64, y2: f64, t: f64) -> f64 {
        let (a, b) = if self.swapped { (y2, y1) } else { (y1, y2) };
        self.c1 * a * a + t.powf(self.exponent) * b * b + self.c2 * a * b
    }
}

/// How the monitored series is smoothed before evaluating `L`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonitorFilter {
    #[default]
    None,
    /// Trapezoid means over consecutive windows of this many samples; with a
    /// fixed step equal to `period / samples_per_period` this removes the fast
    /// oscillation of the polar variables.
    PeriodMean { samples_per_period: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub form: LyapunovForm,
    pub pairs: usize,
    pub decreasing_pairs: usize,
    pub fraction: f64,
    /// First monitored index after which `L` never increases.
    pub monotone_from: Option<usize>,
    pub series: Vec<(f64, f64)>,
}

/// Evaluates `L` along `(ϱ − ϱ*, θ − φ*)` for `t > t_min`.
pub fn lyapunov_monitor(
    fp: &FixedPointReport,
    samples: &[Sample],
    t_min: f64,
    filter: MonitorFilter,
) -> Result<LyapunovReport> {
    let form = LyapunovForm::build(fp)?;
    let pts: Vec<(f64, f64, f64)> = match filter {
        MonitorFilter::None => samples.iter().map(|s| (s.t, s.rho, s.theta)).collect(),
        MonitorFilter::PeriodMean { samples_per_period: k } => {
            if k == 0 {
                return Err(Error::InvalidParameter("samples_per_period must be positive".into()));
            }
            samples
                .windows(k + 1)
                .step_by(k)
                .map(|w| {
                    let span = w[k].t - w[0].t;
                    let mut acc = (0.0, 0.0, 0.0);
                    for p in w.windows(2) {
                        let dt = 0.5 * (p[1].t - p[0].t);
                        acc.0 += dt * (p[0].t + p[1].t);
                        acc.1 += dt * (p[0].rho + p[1].rho);
                        acc.2 += dt * (p[0].theta + p[1].theta);
                    }
                    (acc.0 / span, acc.1 / span, acc.2 / span)
                })
                .collect()
        }
    };
    let series: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 > t_min)
        .map(|&(t, rho, theta)| {
            let y1 = rho - fp.rho_star;
            let y2 = wrap_angle(theta - fp.phi_star);
            (t, form.eval(y1, y2, t))
        })
        .collect();
    let non_increasing = |a: f64, b: f64| b <= a + 1e-9 * a.abs();
    let pairs = series.len().saturating_sub(1);
    let decreasing_pairs = series.windows(2).filter(|w| non_increasing(w[0].1, w[1].1)).count();
    let mut monotone_from = None;
    if !series.is_empty() {
        let mut i = series.len() - 1;
        while i > 0 && non_increasing(series[i - 1].1, series[i].1) {
            i -= 1;
        }
        monotone_from = Some(i);
    }
    Ok(LyapunovReport {
        form,
        pairs,
        decreasing_pairs,
        fraction: if pairs == 0 { 1.0 } else { decreasing_pairs as f64 / pairs as f64 },
        monotone_from,
        series,
    })
}
