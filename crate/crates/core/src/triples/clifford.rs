use nalgebra::DVector;

use crate::error::Result;
use crate::operator_core::{ComplexOperator, C64};

use super::FiniteSpectralTriple;

/// Relative residual below which a candidate is treated as already in the span.
pub const CLIFFORD_DROP_TOL: f64 = 1e-9;

/// Hilbert–Schmidt orthonormal basis of the algebra generated by π(A) and [D, π(A)].
#[derive(Clone, Debug)]
pub struct CliffordBasis {
    pub basis: Vec<ComplexOperator>,
    pub dimension: usize,
}

/// Orthonormal family of flattened operators, grown by Gram–Schmidt.
pub(crate) struct HsSpan {
    rows: usize,
    cols: usize,
    vectors: Vec<DVector<C64>>,
    tol: f64,
}

impl HsSpan {
    pub(crate) fn new(rows: usize, cols: usize, tol: f64) -> Self {
        Self { rows, cols, vectors: Vec::new(), tol }
    }

    pub(crate) fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Adds `op` if it is not already in the span; returns whether it was added.
    pub(crate) fn push(&mut self, op: &ComplexOperator) -> bool {
        let mut v = DVector::from_iterator(self.rows * self.cols, op.matrix().iter().copied());
        let norm0 = v.norm();
        if norm0 == 0.0 {
            return false;
        }
        // two passes of classical Gram–Schmidt keep the family orthonormal to round-off
        for _ in 0..2 {
            for q in &self.vectors {
                let proj = q.dotc(&v);
                v.axpy(-proj, q, C64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm <= self.tol * norm0 {
            return false;
        }
        v /= C64::new(norm, 0.0);
        self.vectors.push(v);
        true
    }

    pub(crate) fn operators(&self) -> Vec<ComplexOperator> {
        self.vectors
            .iter()
            .map(|v| {
                ComplexOperator::from_matrix(nalgebra::DMatrix::from_column_slice(self.rows, self.cols, v.as_slice()))
            })
            .collect()
    }
}

/// Span closure of words in {π(e_i)} ∪ {[D, π(e_i)]}, including the identity.
pub fn clifford_algebra(t: &FiniteSpectralTriple, tol: f64) -> Result<CliffordBasis> {
    let m = t.hilbert_dim();
    let mut generators = Vec::new();
    for (k, r) in t.rep_basis().iter().enumerate() {
        generators.push(r.to_dense());
        let mut coords = vec![C64::new(0.0, 0.0); t.algebra().dim()];
        coords[k] = C64::new(1.0, 0.0);
        generators.push(t.dirac_commutator(&coords)?.to_dense());
    }
    let mut span = HsSpan::new(m, m, tol);
    span.push(&ComplexOperator::identity(m));
    for g in &generators {
        span.push(g);
    }
    loop {
        let before = span.len();
        for b in span.operators() {
            for g in &generators {
                span.push(&g.mul(&b)?);
            }
        }
        if span.len() == before {
            break;
        }
    }
    let basis = span.operators();
    Ok(CliffordBasis { dimension: basis.len(), basis })
}
