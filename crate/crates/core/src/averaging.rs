//! Averaging in the resonant rotating frame.
//!
//! With `Ψ = φ − (κ/ϰ)S`, the coefficients `F_k(R, Ψ, S)`, `G_k(R, Ψ, S)` are
//! `2πϰ`-periodic in `S`. The averaged coefficients are
//! `Λ_k = ⟨F_k − F̃_k⟩`, `Ω_k = ⟨G_k − G̃_k⟩` (mean over one `S`-period), and the
//! near-identity transform coefficients solve `s₀ ∂_S (u_k, v_k) = (Λ_k − F_k + F̃_k, …)`.
//! Orders one and two are implemented; order two needs `u₁`, `v₁` on a small
//! `(R, Ψ)` stencil, differentiated by fourth-order central differences.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SystemSpec, TermFn};
use crate::spectral::PeriodicGrid;

/// `(r, ψ) -> (Λ_k, Ω_k)`.
pub type PairFn = Arc<dyn Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync>;

pub const NULL_TOL: f64 = 1e-10;
pub const DEFAULT_STENCIL_STEP: f64 = 2e-3;

#[derive(Clone)]
struct RotatedTerm {
    k: u32,
    f: TermFn,
    g: TermFn,
}

/// Coefficients `F_k`, `G_k` in the resonant rotating frame.
#[derive(Clone)]
pub struct RotatingField {
    pub kappa: i64,
    pub varkappa: i64,
    pub s0: f64,
    pub q: u32,
    pub r_max: f64,
    terms: Vec<RotatedTerm>,
    s_coeffs: Vec<(u32, f64)>,
}

impl fmt::Debug for RotatingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RotatingField")
            .field("kappa", &self.kappa)
            .field("varkappa", &self.varkappa)
            .field("s0", &self.s0)
            .field("q", &self.q)
            .field("orders", &self.terms.iter().map(|t| t.k).collect::<Vec<_>>())
            .finish()
    }
}

impl RotatingField {
    fn ratio(&self) -> f64 {
        self.kappa as f64 / self.varkappa as f64
    }

    pub fn s_period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.varkappa as f64
    }

    /// `F_k(R, Ψ, S) = f_k(R, κS/ϰ + Ψ, S)`; zero when the system has no order-`k` term.
    pub fn f(&self, k: u32, r: f64, psi: f64, s: f64) -> f64 {
        match self.terms.iter().find(|t| t.k == k) {
            Some(t) => (t.f)(r, self.ratio() * s + psi, s),
            None => 0.0,
        }
    }

    /// `G_k(R, Ψ, S) = g_k(R, κS/ϰ + Ψ, S) − κ s_k/ϰ`.
    pub fn g(&self, k: u32, r: f64, psi: f64, s: f64) -> f64 {
        let shift = self.ratio() * self.s_coeff(k);
        match self.terms.iter().find(|t| t.k == k) {
            Some(t) => (t.g)(r, self.ratio() * s + psi, s) - shift,
            None => -shift,
        }
    }

    pub fn s_coeff(&self, k: u32) -> f64 {
        self.s_coeffs
            .iter()
            .filter(|(j, _)| *j == k)
            .map(|(_, v)| v)
            .sum()
    }

    fn samples(&self, k: u32, r: f64, psi: f64, grid: &PeriodicGrid) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut fs = Vec::with_capacity(grid.len());
        let mut gs = Vec::with_capacity(grid.len());
        for s in grid.nodes() {
            let (a, b) = (self.f(k, r, psi, s), self.g(k, r, psi, s));
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFiniteIntegrand { r, psi, s });
            }
            fs.push(a);
            gs.push(b);
        }
        Ok((fs, gs))
    }
}

/// Wraps the system's terms in the resonant rotating frame.
pub fn rotate(sys: &SystemSpec) -> Result<RotatingField> {
    let res = sys.resonance()?;
    Ok(RotatingField {
        kappa: res.kappa,
        varkappa: res.varkappa,
        s0: sys.drive.s0,
        q: sys.drive.q,
        r_max: sys.r_max,
        terms: sys
            .terms
            .iter()
            .map(|t| RotatedTerm {
                k: t.k,
                f: Arc::clone(&t.f),
                g: Arc::clone(&t.g),
            })
            .collect(),
        s_coeffs: sys.drive.corrections.iter().map(|c| (c.k, c.s_k)).collect(),
    })
}

/// Number of uniform `S` nodes over one period `[0, 2πϰ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_s: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_s: 64 }
    }
}

impl QuadratureSpec {
    fn grid(&self, rf: &RotatingField) -> Result<PeriodicGrid> {
        if self.n_s < 64 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 64 nodes, got {}",
                self.n_s
            )));
        }
        Ok(PeriodicGrid::new(self.n_s, rf.s_period()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    ClosedForm,
    Quadrature,
}

/// Averaged coefficients `Λ_k`, `Ω_k` of the truncated system.
#[derive(Clone)]
pub struct AveragedField {
    pub q: u32,
    pub r_max: f64,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub source: FieldSource,
    entries: BTreeMap<u32, PairFn>,
}

impl fmt::Debug for AveragedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AveragedField")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("source", &self.source)
            .field("orders", &self.entries.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl AveragedField {
    pub fn new(q: u32, r_max: f64, source: FieldSource) -> Self {
        Self {
            q,
            r_max,
            n: None,
            m: None,
            source,
            entries: BTreeMap::new(),
        }
    }

    pub fn with_entry(mut self, k: u32, eval: PairFn) -> Self {
        self.entries.insert(k, eval);
        self
    }

    /// Closed-form entry from two plain functions.
    pub fn with_closed_form(
        self,
        k: u32,
        lambda: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        omega: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.with_entry(k, Arc::new(move |r, psi| Ok((lambda(r, psi), omega(r, psi)))))
    }

    pub fn with_indices(mut self, n: u32, m: u32) -> Self {
        self.n = Some(n);
        self.m = Some(m);
        self
    }

    pub fn orders(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn has(&self, k: u32) -> bool {
        self.entries.contains_key(&k)
    }

    pub fn get(&self, k: u32, r: f64, psi: f64) -> Result<(f64, f64)> {
        match self.entries.get(&k) {
            Some(e) => e(r, psi),
            None => Err(Error::MissingOrder(k)),
        }
    }

    /// Like [`get`](Self::get) but treats absent orders as zero.
    pub fn get_or_zero(&self, k: u32, r: f64, psi: f64) -> Result<(f64, f64)> {
        match self.entries.get(&k) {
            Some(e) => e(r, psi),
            None => Ok((0.0, 0.0)),
        }
    }

    pub fn lambda(&self, k: u32, r: f64, psi: f64) -> Result<f64> {
        self.get(k, r, psi).map(|p| p.0)
    }

    pub fn omega(&self, k: u32, r: f64, psi: f64) -> Result<f64> {
        self.get(k, r, psi).map(|p| p.1)
    }

    /// Leading indices, detecting them if they were not declared.
    pub fn indices(&self) -> Result<(u32, u32)> {
        match (self.n, self.m) {
            (Some(n), Some(m)) => Ok((n, m)),
            _ => detect_leading_indices(self),
        }
    }

    /// CSV dump `r,psi,lambda_k,omega_k` over a tensor grid.
    pub fn grid_csv(&self, k: u32, r_nodes: &[f64], psi_nodes: &[f64]) -> Result<String> {
        let mut out = format!("r,psi,lambda_{k},omega_{k}\n");
        for &r in r_nodes {
            for &psi in psi_nodes {
                let (l, o) = self.get(k, r, psi)?;
                let _ = writeln!(out, "{r:.16e},{psi:.16e},{l:.16e},{o:.16e}");
            }
        }
        Ok(out)
    }

    /// Uniform `(r, ψ)` test grid used for vanishing checks.
    pub fn test_grid(&self) -> (Vec<f64>, Vec<f64>) {
        let rs = (0..8).map(|i| self.r_max * (0.05 + 0.85 * i as f64 / 7.0)).collect();
        let ps = (0..12)
            .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / 12.0)
            .collect();
        (rs, ps)
    }
}

/// Order-one mean at one point.
pub fn order1_at(rf: &RotatingField, grid: &PeriodicGrid, r: f64, psi: f64) -> Result<(f64, f64)> {
    let (fs, gs) = rf.samples(1, r, psi, grid)?;
    Ok((PeriodicGrid::mean(&fs), PeriodicGrid::mean(&gs)))
}

/// `Λ₁ = ⟨F₁⟩`, `Ω₁ = ⟨G₁⟩` by the periodic trapezoid rule.
pub fn average_order1(rf: &RotatingField, quad: QuadratureSpec) -> Result<AveragedField> {
    let grid = quad.grid(rf)?;
    let rf_c = rf.clone();
    let eval: PairFn = Arc::new(move |r, psi| order1_at(&rf_c, &grid, r, psi));
    Ok(AveragedField::new(rf.q, rf.r_max, FieldSource::Quadrature).with_entry(1, eval))
}

/// `u₁`, `v₁` sampled on an `(R, Ψ, S)` tensor grid.
#[derive(Debug, Clone)]
pub struct HomologicalSolution {
    pub r_nodes: Vec<f64>,
    pub psi_nodes: Vec<f64>,
    pub grid: PeriodicGrid,
    /// Indexed `[(i * psi_nodes.len() + j) * n_s + l]`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `Λ₁`, `Ω₁` at each `(R, Ψ)` node, indexed `i * psi_nodes.len() + j`.
    pub lambda1: Vec<f64>,
    pub omega1: Vec<f64>,
}

impl HomologicalSolution {
    fn node(&self, i: usize, j: usize) -> usize {
        i * self.psi_nodes.len() + j
    }

    pub fn u_at(&self, i: usize, j: usize) -> &[f64] {
        let n = self.grid.len();
        let base = self.node(i, j) * n;
        &self.u[base..base + n]
    }

    pub fn v_at(&self, i: usize, j: usize) -> &[f64] {
        let n = self.grid.len();
        let base = self.node(i, j) * n;
        &self.v[base..base + n]
    }

    /// `max |s₀ ∂_S u₁ − (Λ₁ − F₁)|` and the same for `v₁`, with `∂_S` spectral.
    pub fn residual(&self, rf: &RotatingField) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &r) in self.r_nodes.iter().enumerate() {
            for (j, &psi) in self.psi_nodes.iter().enumerate() {
                let (fs, gs) = rf.samples(1, r, psi, &self.grid)?;
                let du = self.grid.derivative(self.u_at(i, j));
                let dv = self.grid.derivative(self.v_at(i, j));
                let node = self.node(i, j);
                for l in 0..self.grid.len() {
                    worst = worst
                        .max((rf.s0 * du[l] - (self.lambda1[node] - fs[l])).abs())
                        .max((rf.s0 * dv[l] - (self.omega1[node] - gs[l])).abs());
                }
            }
        }
        Ok(worst)
    }
}

fn check_mean(values: &[f64], r: f64, psi: f64) -> Result<()> {
    let mean = PeriodicGrid::mean(values);
    let scale = values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if mean.abs() > 1e-10 * scale {
        return Err(Error::InconsistentAveraging { r, psi, mean });
    }
    Ok(())
}

/// Solves `s₀ ∂_S u₁ = Λ₁ − F₁`, `s₀ ∂_S v₁ = Ω₁ − G₁` for the zero-mean periodic branch.
pub fn solve_homological_order1(
    rf: &RotatingField,
    avg1: &AveragedField,
    r_nodes: &[f64],
    psi_nodes: &[f64],
    quad: QuadratureSpec,
) -> Result<HomologicalSolution> {
    let grid = quad.grid(rf)?;
    solve_on_grid(rf, avg1, r_nodes, psi_nodes, grid)
}

fn solve_on_grid(
    rf: &RotatingField,
    avg1: &AveragedField,
    r_nodes: &[f64],
    psi_nodes: &[f64],
    grid: PeriodicGrid,
) -> Result<HomologicalSolution> {
    let ns = grid.len();
    let total = r_nodes.len() * psi_nodes.len();
    let mut u = Vec::with_capacity(total * ns);
    let mut v = Vec::with_capacity(total * ns);
    let mut lambda1 = Vec::with_capacity(total);
    let mut omega1 = Vec::with_capacity(total);
    for &r in r_nodes {
        for &psi in psi_nodes {
            let (l1, o1) = avg1.get(1, r, psi)?;
            let (fs, gs) = rf.samples(1, r, psi, &grid)?;
            let rhs_u: Vec<f64> = fs.iter().map(|f| l1 - f).collect();
            let rhs_v: Vec<f64> = gs.iter().map(|g| o1 - g).collect();
            check_mean(&rhs_u, r, psi)?;
            check_mean(&rhs_v, r, psi)?;
            u.extend(grid.antiderivative(&rhs_u).into_iter().map(|x| x / rf.s0));
            v.extend(grid.antiderivative(&rhs_v).into_iter().map(|x| x / rf.s0));
            lambda1.push(l1);
            omega1.push(o1);
        }
    }
    Ok(HomologicalSolution {
        r_nodes: r_nodes.to_vec(),
        psi_nodes: psi_nodes.to_vec(),
        grid,
        u,
        v,
        lambda1,
        omega1,
    })
}

/// `Λ₂`, `Ω₂` at the interior nodes of a homological solution grid.
#[derive(Debug, Clone)]
pub struct Order2Grid {
    pub r_nodes: Vec<f64>,
    pub psi_nodes: Vec<f64>,
    /// Indexed `i * psi_nodes.len() + j`.
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
    /// Set when halving the difference stencil resolution changes the result
    /// by more than the tolerance.
    pub warning: Option<String>,
}

pub const ORDER2_ACCURACY_TOL: f64 = 1e-6;

fn uniform_step(nodes: &[f64]) -> Result<f64> {
    if nodes.len() < 5 {
        return Err(Error::InvalidParameter(
            "order-2 averaging needs at least 5 nodes per direction".into(),
        ));
    }
    let h = nodes[1] - nodes[0];
    let uniform = nodes
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !(h > 0.0) || !uniform {
        return Err(Error::InvalidParameter(
            "order-2 averaging needs uniform increasing node spacing".into(),
        ));
    }
    Ok(h)
}

/// Fourth-order central difference from values at offsets −2s..2s.
#[inline]
fn d4(m2: f64, m1: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
}

/// Builds `F̃₂`, `G̃₂` and averages `F₂ − F̃₂`, `G₂ − G̃₂` at node `(i, j)` using
/// difference stencils of `stride` grid steps.
fn order2_node(
    rf: &RotatingField,
    hom: &HomologicalSolution,
    s1: f64,
    i: usize,
    j: usize,
    stride: usize,
    hr: f64,
    hp: f64,
) -> Result<(f64, f64)> {
    let grid = &hom.grid;
    let ns = grid.len();
    let r = hom.r_nodes[i];
    let psi = hom.psi_nodes[j];
    let (f1, g1) = rf.samples(1, r, psi, grid)?;
    let (f2, g2) = rf.samples(2, r, psi, grid)?;
    let (hr, hp) = (hr * stride as f64, hp * stride as f64);
    let s = stride;

    let nd = |a: usize, b: usize| hom.node(a, b);
    let dr_l1 = d4(
        hom.lambda1[nd(i - 2 * s, j)],
        hom.lambda1[nd(i - s, j)],
        hom.lambda1[nd(i + s, j)],
        hom.lambda1[nd(i + 2 * s, j)],
        hr,
    );
    let dp_l1 = d4(
        hom.lambda1[nd(i, j - 2 * s)],
        hom.lambda1[nd(i, j - s)],
        hom.lambda1[nd(i, j + s)],
        hom.lambda1[nd(i, j + 2 * s)],
        hp,
    );
    let dr_o1 = d4(
        hom.omega1[nd(i - 2 * s, j)],
        hom.omega1[nd(i - s, j)],
        hom.omega1[nd(i + s, j)],
        hom.omega1[nd(i + 2 * s, j)],
        hr,
    );
    let dp_o1 = d4(
        hom.omega1[nd(i, j - 2 * s)],
        hom.omega1[nd(i, j - s)],
        hom.omega1[nd(i, j + s)],
        hom.omega1[nd(i, j + 2 * s)],
        hp,
    );

    let u = hom.u_at(i, j);
    let v = hom.v_at(i, j);
    let du_s = grid.derivative(u);
    let dv_s = grid.derivative(v);
    let (ur, vr) = (
        [hom.u_at(i - 2 * s, j), hom.u_at(i - s, j), hom.u_at(i + s, j), hom.u_at(i + 2 * s, j)],
        [hom.v_at(i - 2 * s, j), hom.v_at(i - s, j), hom.v_at(i + s, j), hom.v_at(i + 2 * s, j)],
    );
    let (up, vp) = (
        [hom.u_at(i, j - 2 * s), hom.u_at(i, j - s), hom.u_at(i, j + s), hom.u_at(i, j + 2 * s)],
        [hom.v_at(i, j - 2 * s), hom.v_at(i, j - s), hom.v_at(i, j + s), hom.v_at(i, j + 2 * s)],
    );
    // (2 − q)/q · u_{2−q}: only q = 1 has a nonzero index.
    let lag = if rf.q == 1 { 1.0 } else { 0.0 };

    let mut acc_f = 0.0;
    let mut acc_g = 0.0;
    for l in 0..ns {
        let du_r = d4(ur[0][l], ur[1][l], ur[2][l], ur[3][l], hr);
        let dv_r = d4(vr[0][l], vr[1][l], vr[2][l], vr[3][l], hr);
        let du_p = d4(up[0][l], up[1][l], up[2][l], up[3][l], hp);
        let dv_p = d4(vp[0][l], vp[1][l], vp[2][l], vp[3][l], hp);
        let f_tilde = -(f1[l] * du_r + g1[l] * du_p + s1 * du_s[l])
            + lag * u[l]
            + (u[l] * dr_l1 + v[l] * dp_l1);
        let g_tilde = -(f1[l] * dv_r + g1[l] * dv_p + s1 * dv_s[l])
            + lag * v[l]
            + (u[l] * dr_o1 + v[l] * dp_o1);
        acc_f += f2[l] - f_tilde;
        acc_g += g2[l] - g_tilde;
    }
    Ok((acc_f / ns as f64, acc_g / ns as f64))
}

/// `Λ₂`, `Ω₂` at every node of `hom` that has two neighbours on each side.
///
/// `s₁` in the `s₁ ∂_S` term is the drive's first frequency correction.
pub fn average_order2(rf: &RotatingField, hom: &HomologicalSolution) -> Result<Order2Grid> {
    let hr = uniform_step(&hom.r_nodes)?;
    let hp = uniform_step(&hom.psi_nodes)?;
    let s1 = rf.s_coeff(1);
    let (nr, np) = (hom.r_nodes.len(), hom.psi_nodes.len());
    let mut lambda = Vec::new();
    let mut omega = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 2..nr - 2 {
        for j in 2..np - 2 {
            let (l, o) = order2_node(rf, hom, s1, i, j, 1, hr, hp)?;
            if i >= 4 && i + 4 < nr && j >= 4 && j + 4 < np {
                let (l2, o2) = order2_node(rf, hom, s1, i, j, 2, hr, hp)?;
                // Richardson estimate of the fourth-order error.
                worst = worst.max((l - l2).abs() / 15.0).max((o - o2).abs() / 15.0);
            }
            lambda.push(l);
            omega.push(o);
        }
    }
    let warning = (worst > ORDER2_ACCURACY_TOL).then(|| {
        format!("difference-stencil error estimate {worst:.3e} exceeds {ORDER2_ACCURACY_TOL:e}; refine the (R, psi) grid")
    });
    Ok(Order2Grid {
        r_nodes: hom.r_nodes[2..nr - 2].to_vec(),
        psi_nodes: hom.psi_nodes[2..np - 2].to_vec(),
        lambda,
        omega,
        warning,
    })
}

/// `Λ₂`, `Ω₂` at a single point from a 5×5 stencil of spacing `h`.
pub fn order2_at(
    rf: &RotatingField,
    avg1: &AveragedField,
    grid: &PeriodicGrid,
    h: f64,
    r: f64,
    psi: f64,
) -> Result<(f64, f64)> {
    let h = h.min(r / 4.0);
    let rs: Vec<f64> = (-2..=2).map(|d| r + d as f64 * h).collect();
    let ps: Vec<f64> = (-2..=2).map(|d| psi + d as f64 * h).collect();
    let hom = solve_on_grid(rf, avg1, &rs, &ps, grid.clone())?;
    order2_node(rf, &hom, rf.s_coeff(1), 2, 2, 1, h, h)
}

/// Averaged field through order two with quadrature/stencil evaluators, and
/// detected leading indices.
pub fn average_through_order2(sys: &SystemSpec, quad: QuadratureSpec) -> Result<AveragedField> {
    let rf = rotate(sys)?;
    let field = average_order1(&rf, quad)?;
    let grid = quad.grid(&rf)?;
    let avg1 = field.clone();
    let order2: PairFn =
        Arc::new(move |r, psi| order2_at(&rf, &avg1, &grid, DEFAULT_STENCIL_STEP, r, psi));
    let field = field.with_entry(2, order2);
    let (n, m) = detect_leading_indices(&field)?;
    Ok(field.with_indices(n, m))
}

/// Order-one near-identity transform between averaged `(R, Ψ)` and original
/// `(r, ψ) = (R − t^(−1/q) u₁, Ψ − t^(−1/q) v₁)`, where `s₀ ∂_S u₁ = Λ₁ − F₁`.
#[derive(Clone)]
pub struct NearIdentity {
    rf: RotatingField,
    avg1: AveragedField,
    grid: PeriodicGrid,
}

impl fmt::Debug for NearIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NearIdentity").field("grid", &self.grid).finish()
    }
}

impl NearIdentity {
    pub fn new(rf: RotatingField, avg1: AveragedField, quad: QuadratureSpec) -> Result<Self> {
        let grid = quad.grid(&rf)?;
        Ok(Self { rf, avg1, grid })
    }

    pub fn for_system(sys: &SystemSpec, quad: QuadratureSpec) -> Result<Self> {
        let rf = rotate(sys)?;
        let avg1 = average_order1(&rf, quad)?;
        Self::new(rf, avg1, quad)
    }

    /// `(u₁, v₁)` at an arbitrary `S` by trigonometric interpolation.
    pub fn uv(&self, r: f64, psi: f64, s: f64) -> Result<(f64, f64)> {
        let hom = solve_on_grid(&self.rf, &self.avg1, &[r], &[psi], self.grid.clone())?;
        let cu = self.grid.coefficients(hom.u_at(0, 0));
        let cv = self.grid.coefficients(hom.v_at(0, 0));
        let s = s.rem_euclid(self.grid.period());
        Ok((self.grid.interpolate(&cu, s), self.grid.interpolate(&cv, s)))
    }

    /// Maps averaged `(R, Ψ)` at time `t` and drive phase `S` to the original variables.
    pub fn apply(&self, r: f64, psi: f64, s: f64, t: f64) -> Result<(f64, f64)> {
        let (u, v) = self.uv(r, psi, s)?;
        let w = t.powf(-1.0 / f64::from(self.rf.q));
        Ok((r - w * u, psi - w * v))
    }

    /// Inverse of [`apply`](Self::apply) to the same order: original to averaged.
    pub fn invert(&self, r: f64, psi: f64, s: f64, t: f64) -> Result<(f64, f64)> {
        let (u, v) = self.uv(r, psi, s)?;
        let w = t.powf(-1.0 / f64::from(self.rf.q));
        Ok((r + w * u, psi + w * v))
    }
}

/// Least `k` with `sup |Λ_k| ≥ null_tol` over the test grid, and likewise for `Ω`.
pub fn detect_leading_indices(avg: &AveragedField) -> Result<(u32, u32)> {
    let (rs, ps) = avg.test_grid();
    let mut n = None;
    let mut m = None;
    let max_k = avg.orders().max().unwrap_or(0);
    for k in avg.orders() {
        let mut sup_l: f64 = 0.0;
        let mut sup_o: f64 = 0.0;
        for &r in &rs {
            for &psi in &ps {
                let (l, o) = avg.get(k, r, psi)?;
                if !l.is_finite() || !o.is_finite() {
                    return Err(Error::NonFiniteIntegrand { r, psi, s: f64::NAN });
                }
                sup_l = sup_l.max(l.abs());
                sup_o = sup_o.max(o.abs());
            }
        }
        if n.is_none() && sup_l >= NULL_TOL {
            n = Some(k);
        }
        if m.is_none() && sup_o >= NULL_TOL {
            m = Some(k);
        }
    }
    match (n, m) {
        (Some(n), Some(m)) => Ok((n, m)),
        _ => Err(Error::IndeterminateOrder(max_k)),
    }
}
