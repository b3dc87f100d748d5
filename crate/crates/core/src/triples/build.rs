use crate::error::{Error, Result};
use crate::operator_core::{real, C64};
use crate::sparse::SparseOperator;

use super::{FiniteAlgebra, FiniteSpectralTriple};

/// Point pairs (j, k), zero-based with j < k, in the order their 2×2 Dirac blocks
/// are appended: k = 1..N−1, then j = 0..k−1.
pub fn npoint_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..n).flat_map(|k| (0..k).map(move |j| (j, k))).collect()
}

/// N-point space on ℂ^{N(N−1)}: each pair (j, k) contributes a copy of ℂ² where
/// a acts as diag(a_j, a_k) and D as [[0, x_jk], [conj(x_jk), 0]].
///
/// `offdiag` lists x_jk in the order of [`npoint_pairs`].
pub fn build_npoint(n: usize, offdiag: &[C64]) -> Result<FiniteSpectralTriple> {
    if n < 2 {
        return Err(Error::Input(format!("an N-point space needs N >= 2, got {n}")));
    }
    let pairs = npoint_pairs(n);
    if offdiag.len() != pairs.len() {
        return Err(Error::Input(format!(
            "{} off-diagonal entries given, {} needed for N = {n}",
            offdiag.len(),
            pairs.len()
        )));
    }
    let m = 2 * pairs.len();
    let mut rep_entries: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); n];
    let mut dirac = Vec::new();
    for (p, (&(j, k), &x)) in pairs.iter().zip(offdiag).enumerate() {
        rep_entries[j].push((2 * p, 2 * p, real(1.0)));
        rep_entries[k].push((2 * p + 1, 2 * p + 1, real(1.0)));
        dirac.push((2 * p, 2 * p + 1, x));
        dirac.push((2 * p + 1, 2 * p, x.conj()));
    }
    let rep = rep_entries.into_iter().map(|e| SparseOperator::from_triplets(m, m, e)).collect();
    FiniteSpectralTriple::new(
        FiniteAlgebra::commutative(n),
        rep,
        SparseOperator::from_triplets(m, m, dirac),
        None,
    )
}

pub fn build_npoint_uniform(n: usize, x: C64) -> Result<FiniteSpectralTriple> {
    build_npoint(n, &vec![x; n.saturating_sub(1) * n / 2])
}

/// Two-point finite geometry on ℂ⁴ with grading diag(−1, 1, 1, −1).
pub fn build_f_ed(d: C64) -> FiniteSpectralTriple {
    let one = real(1.0);
    let rep = vec![
        SparseOperator::diagonal(&[one, one, real(0.0), real(0.0)]),
        SparseOperator::diagonal(&[real(0.0), real(0.0), one, one]),
    ];
    let dirac = SparseOperator::from_triplets(
        4,
        4,
        [(0, 1, d), (1, 0, d.conj()), (2, 3, d.conj()), (3, 2, d)],
    );
    let grading = SparseOperator::diagonal(&[-one, one, one, -one]);
    FiniteSpectralTriple::new(FiniteAlgebra::commutative(2), rep, dirac, Some(grading))
        .expect("fixed shapes")
}

/// Product geometry with Dirac operator D ⊗ 1 + γ ⊗ D_F and representation π ⊗ π_F.
///
/// Block (i, j) of the product algebra is M_{n_i m_j}, identified with M_{n_i} ⊗ M_{m_j}
/// through Kronecker indexing.
pub fn product_triple(even: &FiniteSpectralTriple, finite: &FiniteSpectralTriple) -> Result<FiniteSpectralTriple> {
    let gamma = even
        .grading()
        .ok_or_else(|| Error::Input("the first factor of a product must carry a grading".into()))?;
    let (ea, fa) = (even.algebra(), finite.algebra());
    let mut dims = Vec::new();
    for &n in ea.block_dims() {
        for &mm in fa.block_dims() {
            dims.push(n * mm);
        }
    }
    let algebra = FiniteAlgebra::new(dims)?;
    let mut rep = vec![SparseOperator::zeros(0, 0); algebra.dim()];
    let nfb = fa.num_blocks();
    for a in 0..ea.dim() {
        let la = ea.label(a);
        for b in 0..fa.dim() {
            let lb = fa.label(b);
            let mm = fa.block_dims()[lb.block];
            let idx = algebra.index(la.block * nfb + lb.block, la.row * mm + lb.row, la.col * mm + lb.col);
            rep[idx] = even.rep_basis()[a].kron(&finite.rep_basis()[b]);
        }
    }
    let id_f = SparseOperator::identity(finite.hilbert_dim());
    let dirac = even.dirac().kron(&id_f).add(&gamma.kron(finite.dirac()))?;
    let grading = finite.grading().map(|gf| gamma.kron(gf));
    FiniteSpectralTriple::new(algebra, rep, dirac, grading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, ComplexOperator};
    use crate::triples::validate_triple;

    #[test]
    fn two_point_space_matches_closed_form() {
        let t = build_npoint_uniform(2, real(1.0)).unwrap();
        assert_eq!(t.hilbert_dim(), 2);
        let d = ComplexOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(t.dirac().to_dense(), d);
        let a = t.represent_coords(&[real(3.0), real(-1.0)]).unwrap().to_dense();
        assert_eq!(a, ComplexOperator::from_diagonal(&[real(3.0), real(-1.0)]));
    }

    #[test]
    fn recursion_appends_pair_blocks() {
        let x: Vec<C64> = (0..3).map(|k| c64(1.0 + k as f64, 0.5)).collect();
        let t3 = build_npoint(3, &x).unwrap();
        assert_eq!(t3.hilbert_dim(), 6);
        let t2 = build_npoint(2, &x[..1]).unwrap();
        let d3 = t3.dirac().to_dense();
        let block = |x: C64| ComplexOperator::from_row_major(2, 2, vec![real(0.0), x, x.conj(), real(0.0)]).unwrap();
        let expected = crate::operator_core::direct_sum(
            &crate::operator_core::direct_sum(&t2.dirac().to_dense(), &block(x[1])),
            &block(x[2]),
        );
        assert_eq!(d3, expected);
        // pair (1,3) sits at Hilbert indices 2,3 in one-based labels, i.e. points 0 and 2 here
        let a = t3.represent_coords(&[real(1.0), real(2.0), real(3.0)]).unwrap();
        let diag: Vec<f64> = a.diagonal_entries().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 2.0, 1.0, 3.0, 2.0, 3.0]);
    }

    #[test]
    fn npoint_dimension_and_validity() {
        for n in 2..=8 {
            let t = build_npoint_uniform(n, c64(0.2, 1.0)).unwrap();
            assert_eq!(t.hilbert_dim(), n * (n - 1));
            assert!(validate_triple(&t, 1e-12).is_valid());
        }
        assert!(build_npoint(1, &[]).is_err());
        assert!(build_npoint(3, &[real(1.0)]).is_err());
    }

    #[test]
    fn zero_couplings_are_accepted() {
        let t = build_npoint_uniform(3, real(0.0)).unwrap();
        assert!(validate_triple(&t, 1e-12).is_valid());
        assert_eq!(t.dirac().nnz(), 0);
    }

    #[test]
    fn f_ed_matches_printed_operators() {
        let d = c64(0.7, -0.3);
        let t = build_f_ed(d);
        let dd = t.dirac().to_dense();
        let nonzero: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| dd.get(i, j).norm() > 0.0)
            .collect();
        assert_eq!(nonzero, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(dd.get(2, 3), d.conj());
        let g: Vec<f64> = t.grading().unwrap().diagonal_entries().iter().map(|z| z.re).collect();
        assert_eq!(g, vec![-1.0, 1.0, 1.0, -1.0]);
        assert!(validate_triple(&t, 1e-12).is_valid());
        for (f1, f2) in [(1.0, 0.0), (0.3, -2.0), (5.0, 5.0)] {
            let c = t.dirac_commutator(&[real(f1), real(f2)]).unwrap();
            assert_eq!(c.max_abs(), 0.0);
        }
    }

    #[test]
    fn product_with_trivial_factor_recovers_even_factor() {
        let even = build_f_ed(c64(1.0, 2.0));
        let trivial = FiniteSpectralTriple::new(
            FiniteAlgebra::commutative(1),
            vec![SparseOperator::identity(1)],
            SparseOperator::zeros(1, 1),
            None,
        )
        .unwrap();
        let p = product_triple(&even, &trivial).unwrap();
        assert_eq!(p.dirac(), even.dirac());
        assert_eq!(p.algebra(), even.algebra());
        assert!(p.grading().is_none());
        assert!(product_triple(&trivial, &even).is_err());
    }

    #[test]
    fn product_of_graded_factors_is_valid() {
        let p = product_triple(&build_f_ed(real(1.0)), &build_f_ed(c64(0.0, 2.0))).unwrap();
        assert_eq!(p.hilbert_dim(), 16);
        assert_eq!(p.algebra().dim(), 4);
        assert!(validate_triple(&p, 1e-12).is_valid());
    }
}
