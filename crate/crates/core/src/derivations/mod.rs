//! Derivation spaces, the ideal-preserving derivations of a quotient map, and the
//! submanifold-algebra decision.

mod map;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use map::{AlgebraMap, BlockRoute};

use crate::error::{Error, Result};
use crate::numeric::{nullspace, nullspace_with, numerical_rank, singular_values, sparse_nullspace, RANK_TOL};
use crate::operator_core::{real, C64};
use crate::triples::{AlgebraElement, FiniteAlgebra};

/// Leibniz residual accepted for a derivation.
pub const LEIBNIZ_TOL: f64 = 1e-9;
/// Residual of D(I) ⊆ I accepted before the quotient derivation is formed.
const PRESERVE_TOL: f64 = 1e-9;
/// Absolute singular-value floor for constraint systems built from orthonormal data.
const ABS_FLOOR: f64 = 1e-10;

/// Basis of Der(A) as matrices acting on coordinates: column a holds D(e_a).
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub algebra: FiniteAlgebra,
    pub basis: Vec<DMatrix<C64>>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orthonormal basis of ker φ, as coordinate vectors in the source algebra.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    pub algebra: FiniteAlgebra,
    pub elements: Vec<Vec<C64>>,
}

impl IdealBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    fn matrix(&self) -> DMatrix<C64> {
        let n = self.algebra.dim();
        let cols: Vec<DVector<C64>> = self.elements.iter().map(|e| DVector::from_column_slice(e)).collect();
        if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubmanifoldReport {
    pub is_submanifold: bool,
    /// Rank of φ_* on the ideal-preserving derivations.
    pub rank: usize,
    pub target_derivations: usize,
    pub ideal_preserving: usize,
}

/// max over basis pairs of ‖D(ab) − D(a)b − aD(b)‖.
pub fn leibniz_residual(alg: &FiniteAlgebra, d: &DMatrix<C64>) -> f64 {
    let n = alg.dim();
    let image = |k: usize| {
        let col: Vec<C64> = d.column(k).iter().copied().collect();
        AlgebraElement::from_coords(alg, &col).expect("column has algebra shape")
    };
    let images: Vec<AlgebraElement> = (0..n).map(image).collect();
    let units: Vec<AlgebraElement> = (0..n)
        .map(|k| {
            let mut c = vec![real(0.0); n];
            c[k] = real(1.0);
            AlgebraElement::from_coords(alg, &c).expect("unit shape")
        })
        .collect();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let lhs = alg.basis_product(a, b).map_or_else(|| AlgebraElement::zero(alg), |p| images[p].clone());
            let rhs = images[a]
                .mul(&units[b])
                .and_then(|x| x.add(&units[a].mul(&images[b])?))
                .expect("same algebra");
            let diff = lhs.add(&rhs.scale(real(-1.0))).expect("same algebra");
            worst = worst.max(diff.max_abs());
        }
    }
    worst
}

/// ad_X(a) = Xa − aX as a coordinate matrix.
pub fn inner_derivation(alg: &FiniteAlgebra, x: &AlgebraElement) -> Result<DMatrix<C64>> {
    let n = alg.dim();
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        let mut c = vec![real(0.0); n];
        c[a] = real(1.0);
        let ea = AlgebraElement::from_coords(alg, &c)?;
        let v = x.mul(&ea)?.add(&ea.mul(x)?.scale(real(-1.0)))?.coords();
        out.set_column(a, &DVector::from_column_slice(&v));
    }
    Ok(out)
}

/// Nullspace of the Leibniz system D(e_a e_b) = D(e_a) e_b + e_a D(e_b) over the
/// matrix-unit multiplication table. Unknown (i, a) is the e_i-coefficient of D(e_a).
pub fn derivation_space(alg: &FiniteAlgebra) -> DerivationSpace {
    let n = alg.dim();
    let unknown = |i: usize, a: usize| i * n + a;
    // left[b] lists (j, i) with e_j e_b = e_i; right[a] lists (j, i) with e_a e_j = e_i
    let mut left: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut right: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for x in 0..n {
        for y in 0..n {
            if let Some(p) = alg.basis_product(x, y) {
                left[y].push((x, p));
                right[x].push((y, p));
            }
        }
    }
    let mut rows = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut eqs: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
            if let Some(p) = alg.basis_product(a, b) {
                for i in 0..n {
                    *eqs.entry(i).or_default().entry(unknown(i, p)).or_default() += 1.0;
                }
            }
            for &(j, i) in &left[b] {
                *eqs.entry(i).or_default().entry(unknown(j, a)).or_default() -= 1.0;
            }
            for &(j, i) in &right[a] {
                *eqs.entry(i).or_default().entry(unknown(j, b)).or_default() -= 1.0;
            }
            for eq in eqs.into_values() {
                let row: Vec<(usize, f64)> = eq.into_iter().filter(|(_, v)| *v != 0.0).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let basis = sparse_nullspace(&rows, n * n)
        .into_iter()
        .map(|v| {
            let mut d = DMatrix::zeros(n, n);
            for (u, x) in v {
                d[(u / n, u % n)] = real(x);
            }
            d
        })
        .collect();
    DerivationSpace { algebra: alg.clone(), basis }
}

/// Kernel of a surjective unital *-homomorphism.
pub fn ideal_kernel(phi: &AlgebraMap) -> Result<IdealBasis> {
    phi.ensure_surjective()?;
    let elements: Vec<Vec<C64>> = nullspace(phi.matrix()).into_iter().map(|v| v.iter().copied().collect()).collect();
    let expected = phi.source().dim() - phi.target().dim();
    if elements.len() != expected {
        return Err(Error::Numerical(format!(
            "kernel has dimension {}, expected {expected}",
            elements.len()
        )));
    }
    Ok(IdealBasis { algebra: phi.source().clone(), elements })
}

/// Derivations D of A with D(I) ⊆ I, as a subspace of Der(A).
pub fn der_phi(alg: &FiniteAlgebra, ideal: &IdealBasis) -> Result<DerivationSpace> {
    if ideal.algebra != *alg {
        return Err(Error::Input("ideal belongs to a different algebra".into()));
    }
    let der = derivation_space(alg);
    if ideal.dim() == 0 || der.dim() == 0 {
        return Ok(der);
    }
    let n = alg.dim();
    let q = ideal.matrix();
    let complement = DMatrix::<C64>::identity(n, n) - &q * q.adjoint();
    let cols: Vec<DVector<C64>> = der
        .basis
        .iter()
        .map(|b| {
            let m = &complement * b * &q;
            DVector::from_iterator(m.len(), m.iter().copied())
        })
        .collect();
    let constraints = DMatrix::from_columns(&cols);
    let smax = singular_values(&constraints).into_iter().fold(0.0, f64::max);
    let basis = nullspace_with(&constraints, (RANK_TOL * smax).max(ABS_FLOOR))
        .into_iter()
        .map(|c| {
            der.basis
                .iter()
                .zip(c.iter())
                .fold(DMatrix::zeros(n, n), |acc, (b, &w)| acc + b * w)
        })
        .collect();
    Ok(DerivationSpace { algebra: alg.clone(), basis })
}

/// Quotient derivation b + 0 ↦ φ(D a) for any a with φ(a) = b, i.e. Φ D Φ⁺.
pub fn phi_star(d: &DMatrix<C64>, phi: &AlgebraMap) -> Result<DMatrix<C64>> {
    let n = phi.source().dim();
    if d.nrows() != n || d.ncols() != n {
        return Err(crate::error::shape("derivation does not act on the source algebra"));
    }
    let ideal = ideal_kernel(phi)?;
    let q = ideal.matrix();
    let leak = (DMatrix::<C64>::identity(n, n) - &q * q.adjoint()) * d * &q;
    let scale = d.camax().max(1.0);
    if leak.camax() > PRESERVE_TOL * scale {
        return Err(Error::Precondition(format!(
            "derivation does not preserve ker φ (residual {:.3e})",
            leak.camax()
        )));
    }
    let m = phi.matrix();
    let pinv = m.clone().pseudo_inverse(1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(m * d * pinv)
}

/// φ is a submanifold map when φ_*: Der_φ(A) → Der(B) is onto.
pub fn is_submanifold_algebra(phi: &AlgebraMap) -> Result<SubmanifoldReport> {
    let ideal = ideal_kernel(phi)?;
    let preserving = der_phi(phi.source(), &ideal)?;
    let target_derivations = derivation_space(phi.target()).dim();
    let images: Vec<DVector<C64>> = preserving
        .basis
        .iter()
        .map(|d| phi_star(d, phi).map(|m| DVector::from_iterator(m.len(), m.iter().copied())))
        .collect::<Result<_>>()?;
    let rank = if images.is_empty() { 0 } else { numerical_rank(&DMatrix::from_columns(&images)) };
    Ok(SubmanifoldReport {
        is_submanifold: rank == target_derivations,
        rank,
        target_derivations,
        ideal_preserving: preserving.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::c64;

    fn alg(d: &[usize]) -> FiniteAlgebra {
        FiniteAlgebra::new(d.to_vec()).unwrap()
    }

    #[test]
    fn derivation_dimensions() {
        assert_eq!(derivation_space(&FiniteAlgebra::commutative(4)).dim(), 0);
        assert_eq!(derivation_space(&alg(&[2])).dim(), 3);
        assert_eq!(derivation_space(&alg(&[2, 1])).dim(), 3);
        assert_eq!(derivation_space(&alg(&[3])).dim(), 8);
    }

    #[test]
    fn derivation_basis_satisfies_leibniz() {
        let a = alg(&[2, 1, 2]);
        let der = derivation_space(&a);
        assert_eq!(der.dim(), 6);
        for d in &der.basis {
            assert!(leibniz_residual(&a, d) < LEIBNIZ_TOL);
        }
    }

    #[test]
    fn inner_derivations_lie_in_the_space() {
        let a = alg(&[2]);
        let x = AlgebraElement::from_coords(&a, &[c64(1.0, 2.0), real(3.0), c64(0.0, -1.0), real(0.5)]).unwrap();
        let d = inner_derivation(&a, &x).unwrap();
        assert!(leibniz_residual(&a, &d) < 1e-12);
        let der = derivation_space(&a);
        let cols: Vec<DVector<C64>> = der
            .basis
            .iter()
            .chain(std::iter::once(&d))
            .map(|m| DVector::from_iterator(m.len(), m.iter().copied()))
            .collect();
        assert_eq!(numerical_rank(&DMatrix::from_columns(&cols)), 3);
    }

    #[test]
    fn ideal_kernels() {
        let drop = AlgebraMap::projection(&FiniteAlgebra::commutative(3), &[0, 1]).unwrap();
        let k = ideal_kernel(&drop).unwrap();
        assert_eq!(k.dim(), 1);
        assert!((k.elements[0][2].norm() - 1.0).abs() < 1e-12);
        assert!(k.elements[0][0].norm() < 1e-12 && k.elements[0][1].norm() < 1e-12);
        let id = AlgebraMap::identity(&alg(&[2, 1]));
        assert_eq!(ideal_kernel(&id).unwrap().dim(), 0);
        let first = AlgebraMap::projection(&alg(&[2, 2]), &[0]).unwrap();
        let k = ideal_kernel(&first).unwrap();
        assert_eq!(k.dim(), 4);
        for e in &k.elements {
            assert!(first.apply(e).unwrap().iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn ideal_preserving_derivations() {
        let drop = AlgebraMap::projection(&FiniteAlgebra::commutative(3), &[0, 1]).unwrap();
        let k = ideal_kernel(&drop).unwrap();
        assert_eq!(der_phi(drop.source(), &k).unwrap().dim(), 0);
        let a = alg(&[2, 2]);
        let first = AlgebraMap::projection(&a, &[0]).unwrap();
        let dp = der_phi(&a, &ideal_kernel(&first).unwrap()).unwrap();
        assert_eq!(dp.dim(), 6);
        let id = AlgebraMap::identity(&a);
        assert_eq!(der_phi(&a, &ideal_kernel(&id).unwrap()).unwrap().dim(), 6);
    }

    #[test]
    fn quotient_of_inner_derivation_is_inner() {
        let a = alg(&[2, 2]);
        let phi = AlgebraMap::projection(&a, &[0]).unwrap();
        let x1 = [c64(0.3, 0.0), c64(1.0, -1.0), c64(2.0, 0.5), c64(-0.7, 0.0)];
        let x2 = [real(1.0), real(2.0), real(3.0), real(4.0)];
        let coords: Vec<C64> = x1.iter().chain(x2.iter()).copied().collect();
        let x = AlgebraElement::from_coords(&a, &coords).unwrap();
        let d = inner_derivation(&a, &x).unwrap();
        let dq = phi_star(&d, &phi).unwrap();
        let b = alg(&[2]);
        let expected = inner_derivation(&b, &AlgebraElement::from_coords(&b, &x1).unwrap()).unwrap();
        assert!((dq - expected).camax() < 1e-12);
        let zero = phi_star(&DMatrix::zeros(8, 8), &phi).unwrap();
        assert_eq!(zero.camax(), 0.0);
    }

    #[test]
    fn non_preserving_derivation_is_rejected() {
        // ad of an off-block-diagonal element does not exist in a direct sum, so break
        // preservation with a non-derivation linear map instead
        let a = alg(&[1, 1]);
        let phi = AlgebraMap::projection(&a, &[0]).unwrap();
        let mut d = DMatrix::zeros(2, 2);
        d[(0, 1)] = real(1.0);
        assert!(matches!(phi_star(&d, &phi), Err(Error::Precondition(_))));
    }

    #[test]
    fn submanifold_decisions() {
        let drop = AlgebraMap::projection(&FiniteAlgebra::commutative(3), &[0, 1]).unwrap();
        let r = is_submanifold_algebra(&drop).unwrap();
        assert!(r.is_submanifold);
        assert_eq!((r.rank, r.target_derivations), (0, 0));
        let first = AlgebraMap::projection(&alg(&[2, 2]), &[0]).unwrap();
        let r = is_submanifold_algebra(&first).unwrap();
        assert!(r.is_submanifold);
        assert_eq!(r.rank, 3);
        assert!(is_submanifold_algebra(&AlgebraMap::identity(&alg(&[3, 1]))).unwrap().is_submanifold);
    }
}
