//! Worked morphisms: the N-point chain, the almost-commutative circle, its finite part,
//! and a parallel circle inside the torus.

use std::sync::Arc;

use super::SmoothMorphism;
use crate::derivations::{AlgebraMap, BlockRoute};
use crate::error::{Error, Result};
use crate::hodge_discrete::{build_circle, build_torus, CircleGrid, TorusGrid};
use crate::operator_core::{real, C64};
use crate::sparse::SparseOperator;
use crate::triples::{build_f_ed, build_npoint, npoint_pairs, product_triple, FiniteAlgebra, FiniteSpectralTriple};

/// [1 | 0]: rows × cols coordinate projection onto the leading block.
pub fn leading_block(rows: usize, cols: usize) -> SparseOperator {
    SparseOperator::from_triplets(rows, cols, (0..rows.min(cols)).map(|i| (i, i, real(1.0))))
}

/// F_n → F_{n−1}: φ drops the last point, u projects onto the pairs not involving it.
///
/// `couplings` lists one off-diagonal entry per pair of F_n.
pub fn npoint_chain(n: usize, couplings: &[C64]) -> Result<SmoothMorphism> {
    if n < 3 {
        return Err(Error::Input(format!("the chain needs n >= 3, got {n}")));
    }
    let big = build_npoint(n, couplings)?;
    let kept = npoint_pairs(n - 1).len();
    let small = build_npoint(n - 1, &couplings[..kept])?;
    let phi = AlgebraMap::projection(big.algebra(), &(0..n - 1).collect::<Vec<_>>())?;
    let u = leading_block(small.hilbert_dim(), big.hilbert_dim());
    SmoothMorphism::new(phi, u, Arc::new(big), Arc::new(small))
}

/// v = [1₂ | 0] as a 2×4 operator.
fn fed_isometry() -> SparseOperator {
    leading_block(2, 4)
}

/// (ℂ, ℂ², D) with D = [[0, d], [d̄, 0]], or zero when `coupling` is `None`.
fn doubled_point(coupling: Option<C64>) -> FiniteSpectralTriple {
    let dirac = match coupling {
        Some(d) => SparseOperator::from_triplets(2, 2, [(0, 1, d), (1, 0, d.conj())]),
        None => SparseOperator::zeros(2, 2),
    };
    FiniteSpectralTriple::new(FiniteAlgebra::commutative(1), vec![SparseOperator::identity(2)], dirac, None)
        .expect("fixed shapes")
}

/// Finite part: F_ED → (ℂ, ℂ², [[0, d], [d̄, 0]]) with u = v.
pub fn fed_finite(d: C64) -> Result<SmoothMorphism> {
    let big = build_f_ed(d);
    let phi = AlgebraMap::projection(big.algebra(), &[0])?;
    SmoothMorphism::new(phi, fed_isometry(), Arc::new(big), Arc::new(doubled_point(Some(d))))
}

/// Circle × F_ED → circle with doubled spinors: φ(f₁, f₂) = f₁, u = Id ⊗ v,
/// target Dirac D_M ⊗ 1₂.
pub fn circle_fed(grid: &CircleGrid, d: C64) -> Result<SmoothMorphism> {
    let circle = build_circle(grid)?.into_triple();
    let big = product_triple(&circle, &build_f_ed(d))?;
    let small = product_triple(&circle, &doubled_point(None))?;
    let keep: Vec<usize> = (0..grid.n).map(|i| 2 * i).collect();
    let phi = AlgebraMap::projection(big.algebra(), &keep)?;
    let u = SparseOperator::identity(circle.hilbert_dim()).kron(&fed_isometry());
    SmoothMorphism::new(phi, u, Arc::new(big), Arc::new(small))
}

/// Torus → parallel θ = 0 with its induced metric (c − sin 0)² = c²: restriction of
/// functions, and u keeps the 0-forms and φ-edges on that ring.
pub fn parallel_in_torus(grid: &TorusGrid) -> Result<SmoothMorphism> {
    let torus = build_torus(grid)?.into_triple();
    let radius = grid.radius(0.0);
    let circle = build_circle(&CircleGrid::constant(grid.nphi, radius * radius))?.into_triple();
    let routes = (0..grid.nphi)
        .map(|j| BlockRoute { target_block: j, source_block: grid.vertex(0, j), conjugation: None })
        .collect();
    let phi = AlgebraMap::from_routing(torus.algebra(), circle.algebra(), routes)?;
    let nv = grid.num_vertices();
    let u = SparseOperator::from_triplets(
        2 * grid.nphi,
        torus.hilbert_dim(),
        (0..grid.nphi).flat_map(|j| {
            let v = grid.vertex(0, j);
            [(j, v, real(1.0)), (grid.nphi + j, 2 * nv + v, real(1.0))]
        }),
    );
    SmoothMorphism::new(phi, u, Arc::new(torus), Arc::new(circle))
}
