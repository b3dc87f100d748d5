//! Morphisms (φ, u) between finite spectral triples and the subtriple conditions.
//!
//! A morphism goes from the larger triple T₂ = (A₂, H₂, D₂) (`source`) to the smaller
//! T₁ = (A₁, H₁, D₁) (`target`): φ: A₂ → A₁ and u: H₂ → H₁ with u π₂(x) = π₁(φ(x)) u.

mod classify;
pub mod examples;
pub mod random;

use std::sync::Arc;

use serde::Serialize;

pub use classify::{classify, default_states, ClassificationReport, FlagResult};

use crate::derivations::{is_submanifold_algebra, AlgebraMap, SubmanifoldReport};
use crate::error::{shape, Error, Result};
use crate::operator_core::{real, C64};
use crate::sparse::{commutator, SparseOperator};
use crate::states_metric::{compress, pullback_state, DistanceOptions, DistanceSolver, PureState, State};
use crate::triples::{clifford_algebra, FiniteSpectralTriple, CLIFFORD_DROP_TOL};
use crate::triples::clifford::HsSpan;

/// Default residual tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default tolerance for equalities between distances.
pub const DEFAULT_EPS: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct SmoothMorphism {
    phi: AlgebraMap,
    u: SparseOperator,
    source: Arc<FiniteSpectralTriple>,
    target: Arc<FiniteSpectralTriple>,
}

impl SmoothMorphism {
    pub fn new(
        phi: AlgebraMap,
        u: SparseOperator,
        source: Arc<FiniteSpectralTriple>,
        target: Arc<FiniteSpectralTriple>,
    ) -> Result<Self> {
        if phi.source().block_dims() != source.algebra().block_dims() {
            return Err(shape("φ does not start at the source algebra"));
        }
        if phi.target().block_dims() != target.algebra().block_dims() {
            return Err(shape("φ does not land in the target algebra"));
        }
        if u.rows() != target.hilbert_dim() || u.cols() != source.hilbert_dim() {
            return Err(shape(format!(
                "u is {}×{}, expected {}×{}",
                u.rows(),
                u.cols(),
                target.hilbert_dim(),
                source.hilbert_dim()
            )));
        }
        Ok(Self { phi, u, source, target })
    }

    /// Identity morphism of a triple.
    pub fn identity(t: Arc<FiniteSpectralTriple>) -> Self {
        let phi = AlgebraMap::identity(t.algebra());
        let u = SparseOperator::identity(t.hilbert_dim());
        Self { phi, u, source: t.clone(), target: t }
    }

    pub fn phi(&self) -> &AlgebraMap {
        &self.phi
    }

    pub fn u(&self) -> &SparseOperator {
        &self.u
    }

    pub fn source(&self) -> &FiniteSpectralTriple {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpectralTriple {
        &self.target
    }

    pub fn source_arc(&self) -> &Arc<FiniteSpectralTriple> {
        &self.source
    }

    pub fn target_arc(&self) -> &Arc<FiniteSpectralTriple> {
        &self.target
    }

    /// P = u*u on H₂.
    pub fn projection(&self) -> Result<SparseOperator> {
        self.u.adjoint().mul(&self.u)
    }

    pub fn with_u(&self, u: SparseOperator) -> Result<Self> {
        Self::new(self.phi.clone(), u, self.source.clone(), self.target.clone())
    }

    pub fn with_source(&self, source: FiniteSpectralTriple) -> Result<Self> {
        Self::new(self.phi.clone(), self.u.clone(), Arc::new(source), self.target.clone())
    }

    pub fn with_target(&self, target: FiniteSpectralTriple) -> Result<Self> {
        Self::new(self.phi.clone(), self.u.clone(), self.source.clone(), Arc::new(target))
    }

    fn unit_coords(&self, k: usize) -> Vec<C64> {
        let mut c = vec![real(0.0); self.source.algebra().dim()];
        c[k] = real(1.0);
        c
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualCheck {
    pub pass: bool,
    pub residual: f64,
    /// Source basis index attaining the residual, where one applies.
    pub worst_basis: Option<usize>,
}

impl ResidualCheck {
    fn from_residuals(residuals: impl Iterator<Item = Result<f64>>, tol: f64) -> Result<Self> {
        let mut residual = 0.0f64;
        let mut worst_basis = None;
        for (k, r) in residuals.enumerate() {
            let r = r?;
            if worst_basis.is_none() || r > residual {
                residual = r;
                worst_basis = Some(k);
            }
        }
        Ok(Self { pass: residual <= tol, residual, worst_basis })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothCheck {
    pub pass: bool,
    pub residual: f64,
    pub worst_basis: Option<usize>,
    /// u = 0 intertwines trivially.
    pub degenerate: bool,
    /// Invariance of smooth domains holds automatically in finite dimension, so the
    /// remaining condition is the intertwining identity.
    pub domains_automatic: bool,
}

/// Conditions 1–4: φ is a unital *-homomorphism (checked on construction) and
/// u π₂(x) = π₁(φ(x)) u on every basis element.
pub fn check_smooth_morphism(m: &SmoothMorphism, tol: f64) -> Result<SmoothCheck> {
    let check = ResidualCheck::from_residuals(
        (0..m.source.algebra().dim()).map(|k| {
            let coords = m.unit_coords(k);
            let left = m.u.mul(&m.source.represent_coords(&coords)?)?;
            let right = m.target.represent_coords(&m.phi.apply(&coords)?)?.mul(&m.u)?;
            Ok(left.sub(&right)?.operator_norm())
        }),
        tol,
    )?;
    Ok(SmoothCheck {
        pass: check.pass,
        residual: check.residual,
        worst_basis: check.worst_basis,
        degenerate: m.u.max_abs() == 0.0,
        domains_automatic: true,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingCheck {
    pub pass: bool,
    pub rank: usize,
    pub target_dim: usize,
    pub submanifold: Option<SubmanifoldReport>,
}

/// Condition 5: φ surjective and the target algebra a submanifold algebra.
pub fn check_embedding(m: &SmoothMorphism) -> Result<EmbeddingCheck> {
    let rank = m.phi.rank();
    let target_dim = m.phi.target().dim();
    if rank != target_dim {
        return Ok(EmbeddingCheck { pass: false, rank, target_dim, submanifold: None });
    }
    let report = is_submanifold_algebra(&m.phi)?;
    Ok(EmbeddingCheck { pass: report.is_submanifold, rank, target_dim, submanifold: Some(report) })
}

/// u[D₂, π₂(x)] = [D₁, π₁(φ(x))]u on every basis element.
pub fn check_riemannian(m: &SmoothMorphism, tol: f64) -> Result<ResidualCheck> {
    ResidualCheck::from_residuals(
        (0..m.source.algebra().dim()).map(|k| {
            let coords = m.unit_coords(k);
            let left = m.u.mul(&m.source.dirac_commutator(&coords)?)?;
            let right = m.target.dirac_commutator(&m.phi.apply(&coords)?)?.mul(&m.u)?;
            Ok(left.sub(&right)?.operator_norm())
        }),
        tol,
    )
}

/// u D₂ = D₁ u.
pub fn check_totally_geodesic(m: &SmoothMorphism, tol: f64) -> Result<ResidualCheck> {
    let residual = m.u.mul(m.source.dirac())?.sub(&m.target.dirac().mul(&m.u)?)?.operator_norm();
    Ok(ResidualCheck { pass: residual <= tol, residual, worst_basis: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoisometryCheck {
    pub partial_isometry: bool,
    pub partial_isometry_residual: f64,
    /// u u* = Id on H₁.
    pub coisometry: bool,
    pub coisometry_residual: f64,
}

pub fn check_coisometry(u: &SparseOperator, tol: f64) -> Result<CoisometryCheck> {
    let uu = u.mul(&u.adjoint())?;
    let pi = uu.mul(u)?.sub(u)?.operator_norm();
    let co = uu.sub(&SparseOperator::identity(u.rows()))?.operator_norm();
    Ok(CoisometryCheck {
        partial_isometry: pi <= tol,
        partial_isometry_residual: pi,
        coisometry: co <= tol,
        coisometry_residual: co,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceCheck {
    pub pass: bool,
    #[serde(serialize_with = "crate::io::finite_or_token")]
    pub max_gap: f64,
    pub worst_pair: Option<(String, String)>,
    pub pairs: usize,
}

/// How d₁ is compared with the ambient distance.
#[derive(Clone, Copy)]
enum Comparison {
    Equal,
    /// Only d₁ − d₂ counts as a gap.
    AtMost,
}

fn gap(a: f64, b: f64, how: Comparison) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        return 0.0;
    }
    match how {
        Comparison::Equal => (a - b).abs(),
        Comparison::AtMost => (a - b).max(0.0),
    }
}

/// Compares d₁(ρ, σ) with d(φ*ρ, φ*σ) in `pulled_back`, over all pairs of `states`.
fn compare_distances(
    m: &SmoothMorphism,
    pulled_back: &FiniteSpectralTriple,
    states: &[PureState],
    eps: f64,
    opts: &DistanceOptions,
    how: Comparison,
) -> Result<DistanceCheck> {
    let mut sub = DistanceSolver::new(&m.target, opts.clone())?;
    let mut ambient = DistanceSolver::new(pulled_back, opts.clone())?;
    let pulled: Vec<State> = states.iter().map(|s| pullback_state(&m.phi, s)).collect::<Result<_>>()?;
    let mut check = DistanceCheck { pass: true, max_gap: 0.0, worst_pair: None, pairs: 0 };
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let d1 = sub.distance(&State::Pure(states[i].clone()), &State::Pure(states[j].clone()))?.value.as_f64();
            let d2 = ambient.distance(&pulled[i], &pulled[j])?.value.as_f64();
            let g = gap(d1, d2, how);
            check.pairs += 1;
            if g > check.max_gap || (g.is_nan() && check.max_gap.is_finite()) {
                check.max_gap = g;
                check.worst_pair = Some((states[i].to_string(), states[j].to_string()));
            }
        }
    }
    check.pass = check.max_gap <= eps;
    Ok(check)
}

/// Condition (a): d_{D₂}(φ*ρ, φ*σ) = d_{D₁}(ρ, σ) over pairs of `states`.
pub fn check_connes_isometric(
    m: &SmoothMorphism,
    states: &[PureState],
    eps: f64,
    opts: &DistanceOptions,
) -> Result<DistanceCheck> {
    compare_distances(m, &m.source, states, eps, opts, Comparison::Equal)
}

/// Condition (d): with P = u*u, d_{PD₂P}(φ*ρ, φ*σ) = d_{D₁}(ρ, σ). Requires u u* = Id.
pub fn check_isometric(
    m: &SmoothMorphism,
    states: &[PureState],
    eps: f64,
    opts: &DistanceOptions,
) -> Result<DistanceCheck> {
    let co = check_coisometry(&m.u, DEFAULT_TOL)?;
    if !co.partial_isometry || !co.coisometry {
        return Err(Error::Precondition(format!(
            "u is not a partial isometry onto H₁ (residuals {:e}, {:e})",
            co.partial_isometry_residual, co.coisometry_residual
        )));
    }
    let compressed = compress(&m.source, &m.projection()?)?;
    compare_distances(m, &compressed, states, eps, opts, Comparison::Equal)
}

/// d_{D₁}(ρ, σ) ≤ d_{PD₂P}(φ*ρ, φ*σ) + eps over pairs of `states`, for u a partial isometry.
pub fn check_compression_monotonicity(
    m: &SmoothMorphism,
    states: &[PureState],
    eps: f64,
    opts: &DistanceOptions,
) -> Result<DistanceCheck> {
    let co = check_coisometry(&m.u, DEFAULT_TOL)?;
    if !co.partial_isometry {
        return Err(Error::Precondition(format!(
            "u is not a partial isometry (residual {:e})",
            co.partial_isometry_residual
        )));
    }
    let compressed = compress(&m.source, &m.projection()?)?;
    compare_distances(m, &compressed, states, eps, opts, Comparison::AtMost)
}

/// [π₂(x), P] = 0 for a partial isometry u on a smooth morphism.
pub fn check_p_commutes_algebra(m: &SmoothMorphism, tol: f64) -> Result<ResidualCheck> {
    let co = check_coisometry(&m.u, tol)?;
    if !co.partial_isometry {
        return Err(Error::Precondition(format!(
            "u is not a partial isometry (residual {:e})",
            co.partial_isometry_residual
        )));
    }
    let p = m.projection()?;
    ResidualCheck::from_residuals(
        m.source.rep_basis().iter().map(|r| Ok(commutator(r, &p)?.operator_norm())),
        tol,
    )
}

#[derive(Clone, Debug)]
pub struct DiracDecomposition {
    /// P D P.
    pub compressed: SparseOperator,
    /// (1 − P) D (1 − P).
    pub normal: SparseOperator,
    pub commutator_norm: f64,
}

/// D = PDP ⊕ (1−P)D(1−P) for a projection commuting with D.
pub fn dirac_decompose(t: &FiniteSpectralTriple, p: &SparseOperator, tol: f64) -> Result<DiracDecomposition> {
    let d = t.dirac();
    if p.rows() != d.rows() || p.cols() != d.cols() {
        return Err(shape("projection does not act on the Hilbert space"));
    }
    if !p.is_projection(tol) {
        return Err(Error::Precondition("operator is not an orthogonal projection".into()));
    }
    let commutator_norm = commutator(d, p)?.operator_norm();
    if commutator_norm > tol {
        return Err(Error::Precondition(format!("[D, P] has norm {commutator_norm:e}")));
    }
    let q = SparseOperator::identity(p.rows()).sub(p)?;
    let compressed = p.mul(d)?.mul(p)?;
    let normal = q.mul(d)?.mul(&q)?;
    let split = compressed.add(&normal)?.sub(d)?.operator_norm();
    if split > tol {
        return Err(Error::Numerical(format!("D differs from its split by {split:e}")));
    }
    Ok(DiracDecomposition { compressed, normal, commutator_norm })
}

/// ‖[D, π(b)]‖ on the range of P against ‖[PDP, π(b)]‖, for each coordinate vector in `basis`.
pub fn check_norm_restriction(
    t: &FiniteSpectralTriple,
    p: &SparseOperator,
    basis: &[Vec<C64>],
    tol: f64,
) -> Result<ResidualCheck> {
    let pdp = dirac_decompose(t, p, tol)?.compressed;
    let compressed = t.with_dirac(pdp, false)?;
    ResidualCheck::from_residuals(
        basis.iter().map(|b| {
            let rep = t.represent_coords(b)?;
            let hyp = commutator(&rep, p)?.operator_norm();
            if hyp > tol {
                return Err(Error::Precondition(format!("[π(b), P] has norm {hyp:e}")));
            }
            let on_range = t.dirac_commutator(b)?.mul(p)?.operator_norm();
            let full = compressed.dirac_commutator(b)?.operator_norm();
            Ok((on_range - full).abs())
        }),
        tol,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct CliffordExpectationCheck {
    pub pass: bool,
    /// max ‖u(ST)u* − (uSu*)(uTu*)‖ over generator pairs.
    pub multiplicative_residual: f64,
    /// max ‖uT*u* − (uTu*)*‖ over generators.
    pub star_residual: f64,
    /// max ‖E(E(T)) − E(T)‖ over the Clifford basis of T₂, E(T) = PTP.
    pub idempotent_residual: f64,
    /// ‖E(1) − P‖.
    pub unit_residual: f64,
    pub rank_sub: usize,
    pub rank_compressed: usize,
    pub rank_joint: usize,
}

/// T ↦ uTu* on Clifford generators, E(T) = PTP, and span(u*Cl₁u) = span(PCl₂P).
pub fn clifford_expectation_check(m: &SmoothMorphism, tol: f64) -> Result<CliffordExpectationCheck> {
    let co = check_coisometry(&m.u, tol)?;
    if !co.coisometry || !co.partial_isometry {
        return Err(Error::Precondition("u u* is not the identity on H₁".into()));
    }
    if !check_riemannian(m, tol)?.pass {
        return Err(Error::Precondition("the morphism is not Riemannian".into()));
    }
    let u = m.u.to_dense();
    let ut = u.adjoint();
    let p = m.projection()?.to_dense();
    let (src, tgt) = (&m.source, &m.target);
    let mut generators = Vec::new();
    for k in 0..src.algebra().dim() {
        let coords = m.unit_coords(k);
        generators.push(src.represent_coords(&coords)?.to_dense());
        generators.push(src.dirac_commutator(&coords)?.to_dense());
    }
    let conj = |t: &crate::operator_core::ComplexOperator| u.mul(t).and_then(|x| x.mul(&ut));
    let mut multiplicative_residual = 0.0f64;
    let mut star_residual = 0.0f64;
    for a in &generators {
        let ua = conj(a)?;
        star_residual = star_residual.max(conj(&a.adjoint())?.sub(&ua.adjoint())?.max_abs());
        for b in &generators {
            let lhs = conj(&a.mul(b)?)?;
            let rhs = ua.mul(&conj(b)?)?;
            multiplicative_residual = multiplicative_residual.max(lhs.sub(&rhs)?.max_abs());
        }
    }
    let expect = |t: &crate::operator_core::ComplexOperator| p.mul(t).and_then(|x| x.mul(&p));
    let cl2 = clifford_algebra(src, CLIFFORD_DROP_TOL)?;
    let mut idempotent_residual = 0.0f64;
    let n2 = src.hilbert_dim();
    let mut compressed_span = HsSpan::new(n2, n2, CLIFFORD_DROP_TOL);
    let mut joint = HsSpan::new(n2, n2, CLIFFORD_DROP_TOL);
    for t in &cl2.basis {
        let e = expect(t)?;
        idempotent_residual = idempotent_residual.max(expect(&e)?.sub(&e)?.max_abs());
        compressed_span.push(&e);
        joint.push(&e);
    }
    let unit_residual = expect(&crate::operator_core::ComplexOperator::identity(n2))?.sub(&p)?.max_abs();
    let cl1 = clifford_algebra(tgt, CLIFFORD_DROP_TOL)?;
    let mut sub_span = HsSpan::new(n2, n2, CLIFFORD_DROP_TOL);
    for t in &cl1.basis {
        let lifted = ut.mul(t)?.mul(&u)?;
        sub_span.push(&lifted);
        joint.push(&lifted);
    }
    let (rank_sub, rank_compressed, rank_joint) = (sub_span.len(), compressed_span.len(), joint.len());
    let pass = multiplicative_residual <= tol
        && star_residual <= tol
        && idempotent_residual <= tol
        && unit_residual <= tol
        && rank_sub == rank_compressed
        && rank_joint == rank_sub;
    Ok(CliffordExpectationCheck {
        pass,
        multiplicative_residual,
        star_residual,
        idempotent_residual,
        unit_residual,
        rank_sub,
        rank_compressed,
        rank_joint,
    })
}
