//! Hodge–de Rham triples on weighted circle and torus grids.
//!
//! Forms live on cells: 0-forms on vertices, 1-forms on edges, 2-forms on faces.
//! Inner products carry the metric volume weights, and every operator is written in
//! the orthonormalized frame d̃ = M^{1/2} d M^{-1/2}, so D = d̃ + d̃* is Hermitian.
//! Functions act on a cell through the value at the cell's base vertex (tail of an
//! edge, lower-left corner of a face), which keeps π a *-homomorphism.

mod verify;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use verify::{
    check_riemannian_immersion, ambient_shortcut_demo, pullback_function, retraction_pullback, unbounded_pullback_demo,
    verify_commutator_norm_equality, verify_gradient_lift, AmbientShortcutReport, GradientLiftReport, ImmersionReport,
    NormEqualityReport, PullbackRow,
};

use crate::error::{Error, Result};
use crate::operator_core::{real, C64};
use crate::sparse::SparseOperator;
use crate::triples::{FiniteAlgebra, FiniteSpectralTriple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleGrid {
    pub n: usize,
    /// g(θ_i) at each vertex.
    pub metric: Vec<f64>,
}

impl CircleGrid {
    pub fn flat(n: usize) -> Self {
        Self { n, metric: vec![1.0; n] }
    }

    pub fn constant(n: usize, g: f64) -> Self {
        Self { n, metric: vec![g; n] }
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.spacing()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusMetric {
    /// dθ² + (c − sin θ)² dφ².
    #[serde(rename = "paper_torus")]
    Revolution,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub ntheta: usize,
    pub nphi: usize,
    pub c: f64,
    pub metric: TorusMetric,
}

impl TorusGrid {
    pub fn new(ntheta: usize, nphi: usize, c: f64) -> Self {
        Self { ntheta, nphi, c, metric: TorusMetric::Revolution }
    }

    pub fn flat(ntheta: usize, nphi: usize) -> Self {
        Self { ntheta, nphi, c: 2.0, metric: TorusMetric::Flat }
    }

    pub fn htheta(&self) -> f64 {
        TAU / self.ntheta as f64
    }

    pub fn hphi(&self) -> f64 {
        TAU / self.nphi as f64
    }

    /// √det g at angle θ.
    pub fn radius(&self, theta: f64) -> f64 {
        match self.metric {
            TorusMetric::Revolution => self.c - theta.sin(),
            TorusMetric::Flat => 1.0,
        }
    }

    pub fn vertex(&self, i: usize, j: usize) -> usize {
        (i % self.ntheta) * self.nphi + (j % self.nphi)
    }

    pub fn num_vertices(&self) -> usize {
        self.ntheta * self.nphi
    }
}

#[derive(Clone, Debug)]
pub enum GridLayout {
    Circle(CircleGrid),
    Torus(TorusGrid),
    Union(Vec<GridLayout>),
}

/// A discrete Hodge–de Rham geometry and its finite spectral triple.
#[derive(Clone, Debug)]
pub struct DiscreteHodgeTriple {
    triple: FiniteSpectralTriple,
    layout: GridLayout,
    /// Orthonormal-frame exterior derivatives d̃_0, d̃_1, ...
    exterior: Vec<SparseOperator>,
    /// Exterior derivatives on raw cell values (finite differences).
    raw: Vec<SparseOperator>,
    form_dims: Vec<usize>,
}

impl DiscreteHodgeTriple {
    pub fn triple(&self) -> &FiniteSpectralTriple {
        &self.triple
    }

    pub fn into_triple(self) -> FiniteSpectralTriple {
        self.triple
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn exterior(&self) -> &[SparseOperator] {
        &self.exterior
    }

    pub fn finite_differences(&self) -> &[SparseOperator] {
        &self.raw
    }

    pub fn form_dims(&self) -> &[usize] {
        &self.form_dims
    }

    pub fn num_vertices(&self) -> usize {
        self.triple.algebra().dim()
    }

    /// Algebra coordinates of a real vertex function.
    pub fn function_coords(&self, values: &[f64]) -> Result<Vec<C64>> {
        if values.len() != self.num_vertices() {
            return Err(Error::Grid(format!(
                "{} values for a grid with {} vertices",
                values.len(),
                self.num_vertices()
            )));
        }
        Ok(values.iter().map(|&v| real(v)).collect())
    }

    /// ‖[D, π(h)]‖ for a vertex function h.
    pub fn commutator_norm(&self, values: &[f64]) -> Result<f64> {
        Ok(self.triple.dirac_commutator(&self.function_coords(values)?)?.operator_norm())
    }
}

/// Assembles D = d̃ + d̃* on Ω⁰ ⊕ Ω¹ (⊕ Ω²) with grading (+1, −1, +1).
fn assemble(
    layout: GridLayout,
    raw: Vec<SparseOperator>,
    masses: Vec<Vec<f64>>,
    base_vertex: Vec<Vec<usize>>,
) -> Result<DiscreteHodgeTriple> {
    let form_dims: Vec<usize> = masses.iter().map(Vec::len).collect();
    let offsets: Vec<usize> = form_dims.iter().scan(0, |acc, &d| {
        let o = *acc;
        *acc += d;
        Some(o)
    }).collect();
    let total: usize = form_dims.iter().sum();
    let mut exterior = Vec::new();
    let mut dirac = Vec::new();
    for (k, d) in raw.iter().enumerate() {
        let (lo, hi) = (&masses[k], &masses[k + 1]);
        let dt = SparseOperator::from_triplets(
            d.rows(),
            d.cols(),
            d.iter().map(|(e, v, x)| (e, v, x * (hi[e] / lo[v]).sqrt())),
        );
        for (e, v, x) in dt.iter() {
            dirac.push((offsets[k + 1] + e, offsets[k] + v, x));
            dirac.push((offsets[k] + v, offsets[k + 1] + e, x.conj()));
        }
        exterior.push(dt);
    }
    let nv = form_dims[0];
    let mut rep_entries: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); nv];
    for (k, bases) in base_vertex.iter().enumerate() {
        for (cell, &v) in bases.iter().enumerate() {
            let idx = offsets[k] + cell;
            rep_entries[v].push((idx, idx, real(1.0)));
        }
    }
    let rep = rep_entries.into_iter().map(|e| SparseOperator::from_triplets(total, total, e)).collect();
    let grading: Vec<C64> = form_dims
        .iter()
        .enumerate()
        .flat_map(|(k, &d)| std::iter::repeat(real(if k % 2 == 0 { 1.0 } else { -1.0 })).take(d))
        .collect();
    let triple = FiniteSpectralTriple::new(
        FiniteAlgebra::commutative(nv),
        rep,
        SparseOperator::from_triplets(total, total, dirac),
        Some(SparseOperator::diagonal(&grading)),
    )?;
    Ok(DiscreteHodgeTriple { triple, layout, exterior, raw, form_dims })
}

pub fn build_circle(grid: &CircleGrid) -> Result<DiscreteHodgeTriple> {
    let n = grid.n;
    if n < 3 {
        return Err(Error::Grid(format!("a circle grid needs n >= 3, got {n}")));
    }
    if grid.metric.len() != n || grid.metric.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Grid("circle metric needs one positive weight per vertex".into()));
    }
    let h = grid.spacing();
    let g = &grid.metric;
    let mv: Vec<f64> = g.iter().map(|gi| gi.sqrt() * h).collect();
    let me: Vec<f64> = (0..n).map(|i| h / (0.5 * (g[i] + g[(i + 1) % n])).sqrt()).collect();
    let d0 = SparseOperator::from_triplets(
        n,
        n,
        (0..n).flat_map(|i| [(i, (i + 1) % n, real(1.0 / h)), (i, i, real(-1.0 / h))]),
    );
    let bases = vec![(0..n).collect(), (0..n).collect()];
    assemble(GridLayout::Circle(grid.clone()), vec![d0], vec![mv, me], bases)
}

pub fn build_torus(grid: &TorusGrid) -> Result<DiscreteHodgeTriple> {
    let (nt, np) = (grid.ntheta, grid.nphi);
    if nt < 3 || np < 3 {
        return Err(Error::Grid(format!("a torus grid needs at least 3×3 cells, got {nt}×{np}")));
    }
    if grid.metric == TorusMetric::Revolution && !(grid.c > 1.0) {
        return Err(Error::Grid(format!("major radius must exceed 1, got {}", grid.c)));
    }
    let (ht, hp) = (grid.htheta(), grid.hphi());
    let nv = grid.num_vertices();
    let v = |i: usize, j: usize| grid.vertex(i, j);
    let area = ht * hp;
    let theta = |i: usize| i as f64 * ht;
    let mid = |i: usize| (i as f64 + 0.5) * ht;
    let mut m0 = vec![0.0; nv];
    let mut mt = vec![0.0; nv];
    let mut mp = vec![0.0; nv];
    let mut mf = vec![0.0; nv];
    for i in 0..nt {
        for j in 0..np {
            let k = v(i, j);
            m0[k] = grid.radius(theta(i)) * area;
            mt[k] = grid.radius(mid(i)) * area;
            mp[k] = area / grid.radius(theta(i));
            mf[k] = area / grid.radius(mid(i));
        }
    }
    let mut d0 = Vec::new();
    let mut d1 = Vec::new();
    for i in 0..nt {
        for j in 0..np {
            let k = v(i, j);
            d0.push((k, v(i + 1, j), real(1.0 / ht)));
            d0.push((k, k, real(-1.0 / ht)));
            d0.push((nv + k, v(i, j + 1), real(1.0 / hp)));
            d0.push((nv + k, k, real(-1.0 / hp)));
            d1.push((k, nv + v(i + 1, j), real(1.0 / ht)));
            d1.push((k, nv + k, real(-1.0 / ht)));
            d1.push((k, v(i, j + 1), real(-1.0 / hp)));
            d1.push((k, k, real(1.0 / hp)));
        }
    }
    let d0 = SparseOperator::from_triplets(2 * nv, nv, d0);
    let d1 = SparseOperator::from_triplets(nv, 2 * nv, d1);
    let m1: Vec<f64> = mt.into_iter().chain(mp).collect();
    let verts: Vec<usize> = (0..nv).collect();
    let bases = vec![verts.clone(), verts.iter().chain(verts.iter()).copied().collect(), verts];
    assemble(GridLayout::Torus(grid.clone()), vec![d0, d1], vec![m0, m1, mf], bases)
}

/// Direct sum of two geometries: algebras, Hilbert spaces and Dirac operators.
pub fn disjoint_union(a: &DiscreteHodgeTriple, b: &DiscreteHodgeTriple) -> Result<DiscreteHodgeTriple> {
    let (ta, tb) = (&a.triple, &b.triple);
    let (ma, mb) = (ta.hilbert_dim(), tb.hilbert_dim());
    let za = SparseOperator::zeros(ma, ma);
    let zb = SparseOperator::zeros(mb, mb);
    let rep = ta
        .rep_basis()
        .iter()
        .map(|r| r.direct_sum(&zb))
        .chain(tb.rep_basis().iter().map(|r| za.direct_sum(r)))
        .collect();
    let grading = match (ta.grading(), tb.grading()) {
        (Some(ga), Some(gb)) => Some(ga.direct_sum(gb)),
        _ => None,
    };
    let triple = FiniteSpectralTriple::new(
        FiniteAlgebra::commutative(a.num_vertices() + b.num_vertices()),
        rep,
        ta.dirac().direct_sum(tb.dirac()),
        grading,
    )?;
    let form_dims = a.form_dims.iter().zip(&b.form_dims).map(|(x, y)| x + y).collect();
    let exterior = a.exterior.iter().zip(&b.exterior).map(|(x, y)| x.direct_sum(y)).collect();
    let raw = a.raw.iter().zip(&b.raw).map(|(x, y)| x.direct_sum(y)).collect();
    Ok(DiscreteHodgeTriple {
        triple,
        layout: GridLayout::Union(vec![a.layout.clone(), b.layout.clone()]),
        exterior,
        raw,
        form_dims,
    })
}

/// Samples f(θ) at the circle vertices.
pub fn sample_circle(grid: &CircleGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.angles().into_iter().map(f).collect()
}

/// Samples f(θ, φ) at the torus vertices in storage order.
pub fn sample_torus(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.num_vertices()];
    for i in 0..grid.ntheta {
        for j in 0..grid.nphi {
            out[grid.vertex(i, j)] = f(i as f64 * grid.htheta(), j as f64 * grid.hphi());
        }
    }
    out
}

/// Real self-adjoint family of θ-ring indicators: functions of θ alone.
pub fn theta_ring_basis(grid: &TorusGrid) -> Vec<Vec<C64>> {
    (0..grid.ntheta)
        .map(|i| {
            let mut v = vec![real(0.0); grid.num_vertices()];
            for j in 0..grid.nphi {
                v[grid.vertex(i, j)] = real(1.0);
            }
            v
        })
        .collect()
}
