//! States on finite algebras and Connes' distance between them.

mod brute;
mod simplex;
mod solver;

use std::fmt;

use nalgebra::DVector;

pub use brute::{brute_force_distance, GridSpec};
pub use solver::{Distance, DistanceOptions, DistanceResult, DistanceSolver};

use crate::derivations::AlgebraMap;
use crate::error::{shape, Error, Result};
use crate::operator_core::{real, C64};
use crate::sparse::SparseOperator;
use crate::triples::{AlgebraElement, FiniteAlgebra, FiniteSpectralTriple};

const UNIT_TOL: f64 = 1e-12;

/// Pure state: evaluation on a one-dimensional block, or a vector state on a matrix block.
#[derive(Clone, Debug, PartialEq)]
pub enum PureState {
    Evaluation { block: usize },
    Vector { block: usize, vector: Vec<C64> },
}

impl PureState {
    pub fn evaluation(block: usize) -> Self {
        PureState::Evaluation { block }
    }

    pub fn vector(block: usize, vector: Vec<C64>) -> Self {
        PureState::Vector { block, vector }
    }

    pub fn block(&self) -> usize {
        match self {
            PureState::Evaluation { block } | PureState::Vector { block, .. } => *block,
        }
    }

    pub fn validate(&self, alg: &FiniteAlgebra) -> Result<()> {
        let b = self.block();
        let Some(&n) = alg.block_dims().get(b) else {
            return Err(Error::Input(format!("state refers to block {b}, algebra has {}", alg.num_blocks())));
        };
        match self {
            PureState::Evaluation { .. } if n != 1 => {
                Err(Error::Input(format!("evaluation state on block {b} of size {n}")))
            }
            PureState::Vector { vector, .. } => {
                if vector.len() != n {
                    return Err(shape(format!("state vector of length {} on block of size {n}", vector.len())));
                }
                let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Input(format!("state vector has norm {norm}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Coefficients w with ρ(a) = Σ_i w_i a_i on algebra coordinates.
    pub fn functional(&self, alg: &FiniteAlgebra) -> Result<Vec<C64>> {
        self.validate(alg)?;
        let mut w = vec![real(0.0); alg.dim()];
        match self {
            PureState::Evaluation { block } => w[alg.index(*block, 0, 0)] = real(1.0),
            PureState::Vector { block, vector } => {
                for (j, xj) in vector.iter().enumerate() {
                    for (k, xk) in vector.iter().enumerate() {
                        w[alg.index(*block, j, k)] = xj.conj() * xk;
                    }
                }
            }
        }
        Ok(w)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PureState::Evaluation { block } => write!(f, "eval[{block}]"),
            PureState::Vector { block, vector } => {
                write!(f, "vec[{block}](")?;
                for (i, z) in vector.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if z.im == 0.0 {
                        write!(f, "{}", z.re)?;
                    } else {
                        write!(f, "{}{:+}i", z.re, z.im)?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

/// A state given as a pure state, a finite convex combination, or a raw coordinate functional.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixture(Vec<(f64, PureState)>),
    Functional(Vec<C64>),
}

impl From<PureState> for State {
    fn from(p: PureState) -> Self {
        State::Pure(p)
    }
}

impl State {
    pub fn functional(&self, alg: &FiniteAlgebra) -> Result<Vec<C64>> {
        match self {
            State::Pure(p) => p.functional(alg),
            State::Mixture(parts) => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Input("mixture weights must be nonnegative and sum to 1".into()));
                }
                let mut out = vec![real(0.0); alg.dim()];
                for (w, p) in parts {
                    for (o, v) in out.iter_mut().zip(p.functional(alg)?) {
                        *o += v * *w;
                    }
                }
                Ok(out)
            }
            State::Functional(w) => {
                if w.len() != alg.dim() {
                    return Err(shape("functional does not match the algebra dimension"));
                }
                Ok(w.clone())
            }
        }
    }

    pub fn evaluate(&self, a: &AlgebraElement, alg: &FiniteAlgebra) -> Result<C64> {
        let w = self.functional(alg)?;
        let c = a.coords();
        if c.len() != w.len() {
            return Err(shape("element and state belong to different algebras"));
        }
        Ok(w.iter().zip(&c).map(|(x, y)| x * y).sum())
    }

    /// a ↦ Σ p_i ⟨ξ_i, π(a) ξ_i⟩ for unit vectors ξ_i in the Hilbert space.
    pub fn from_spatial(t: &FiniteSpectralTriple, parts: &[(f64, Vec<C64>)]) -> Result<Self> {
        let mut w = vec![real(0.0); t.algebra().dim()];
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        if parts.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::Input("mixture weights must be nonnegative and sum to 1".into()));
        }
        for (p, xi) in parts {
            if xi.len() != t.hilbert_dim() {
                return Err(shape("spatial vector does not match the Hilbert space"));
            }
            let norm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Input(format!("spatial vector has norm {norm}")));
            }
            for (k, r) in t.rep_basis().iter().enumerate() {
                let rx = r.mul_vec(xi);
                w[k] += xi.iter().zip(&rx).map(|(a, b)| a.conj() * b).sum::<C64>() * *p;
            }
        }
        Ok(State::Functional(w))
    }
}

pub fn evaluate(rho: &PureState, a: &AlgebraElement, alg: &FiniteAlgebra) -> Result<C64> {
    State::Pure(rho.clone()).evaluate(a, alg)
}

/// Evaluation states on one-dimensional blocks and standard-basis vector states on matrix blocks.
pub fn standard_states(alg: &FiniteAlgebra) -> Vec<PureState> {
    let mut out = Vec::new();
    for (b, &n) in alg.block_dims().iter().enumerate() {
        if n == 1 {
            out.push(PureState::evaluation(b));
        } else {
            for j in 0..n {
                let mut v = vec![real(0.0); n];
                v[j] = real(1.0);
                out.push(PureState::vector(b, v));
            }
        }
    }
    out
}

/// (φ*ρ)(a) = ρ(φ(a)). Routed maps send pure states to pure states on the source block.
pub fn pullback_state(phi: &AlgebraMap, rho: &PureState) -> Result<State> {
    phi.ensure_surjective()?;
    rho.validate(phi.target())?;
    if let Some(routes) = phi.routing() {
        let route = routes
            .iter()
            .find(|r| r.target_block == rho.block())
            .expect("every target block of a routing has a route");
        let n = phi.source().block_dims()[route.source_block];
        let pulled = match (rho, &route.conjugation) {
            (PureState::Evaluation { .. }, _) => PureState::evaluation(route.source_block),
            (PureState::Vector { vector, .. }, u) => {
                let xi = DVector::from_column_slice(vector);
                let v: Vec<C64> = match u {
                    Some(u) => (u.adjoint() * xi).iter().copied().collect(),
                    None => vector.clone(),
                };
                if n == 1 {
                    PureState::evaluation(route.source_block)
                } else {
                    PureState::vector(route.source_block, v)
                }
            }
        };
        return Ok(State::Pure(pulled));
    }
    pullback_functional(phi, &State::Pure(rho.clone()))
}

/// General pullback Φᵀw of a coordinate functional.
pub fn pullback_functional(phi: &AlgebraMap, state: &State) -> Result<State> {
    phi.ensure_surjective()?;
    let w = DVector::from_vec(state.functional(phi.target())?);
    Ok(State::Functional(phi.matrix().tr_mul(&w).iter().copied().collect()))
}

pub fn connes_distance(
    t: &FiniteSpectralTriple,
    rho: &State,
    sigma: &State,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    DistanceSolver::new(t, opts.clone())?.distance(rho, sigma)
}

/// Distance with the supremum restricted to real combinations of a self-adjoint family.
pub fn connes_distance_restricted(
    t: &FiniteSpectralTriple,
    basis: &[Vec<C64>],
    rho: &State,
    sigma: &State,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    DistanceSolver::restricted(t, basis.to_vec(), opts.clone())?.distance(rho, sigma)
}

/// Distance for the Dirac operator compressed to P D P.
pub fn compressed_distance(
    t: &FiniteSpectralTriple,
    p: &SparseOperator,
    rho: &State,
    sigma: &State,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    connes_distance(&compress(t, p)?, rho, sigma, opts)
}

/// The triple with Dirac operator P D P.
pub fn compress(t: &FiniteSpectralTriple, p: &SparseOperator) -> Result<FiniteSpectralTriple> {
    if p.rows() != t.hilbert_dim() || p.cols() != t.hilbert_dim() {
        return Err(shape("projection does not act on the Hilbert space"));
    }
    if !p.is_projection(1e-10) {
        return Err(Error::Precondition("compression operator is not an orthogonal projection".into()));
    }
    let pdp = p.mul(t.dirac())?.mul(p)?;
    t.with_dirac(pdp, false)
}
