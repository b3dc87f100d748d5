//! Compressed-row complex operators that store only their nonempty rows.
//!
//! Triples built from grids have Hilbert spaces in the tens of thousands of dimensions
//! while a representation image touches a handful of rows, so triples store their
//! Dirac operator, representation and grading here and convert to [`ComplexOperator`]
//! on demand.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;

use crate::error::{shape, Result};
use crate::operator_core::{ComplexOperator, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    /// Sorted indices of the nonempty rows.
    row_ids: Vec<usize>,
    /// Offsets into `indices` per entry of `row_ids`, plus the end.
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ids: Vec::new(), indptr: vec![0], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicates are summed; entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(i, j, _) in &t {
            assert!(i < rows && j < cols, "triplet ({i},{j}) outside {rows}x{cols}");
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut out = Self::zeros(rows, cols);
        let mut k = 0;
        while k < t.len() {
            let (i, j, mut v) = t[k];
            k += 1;
            while k < t.len() && t[k].0 == i && t[k].1 == j {
                v += t[k].2;
                k += 1;
            }
            if v != ZERO {
                out.push(i, j, v);
            }
        }
        out
    }

    /// Appends an entry; rows and columns must arrive in increasing order.
    fn push(&mut self, i: usize, j: usize, v: C64) {
        if self.row_ids.last() != Some(&i) {
            self.row_ids.push(i);
            self.indptr.push(self.indices.len());
        }
        self.indices.push(j);
        self.values.push(v);
        *self.indptr.last_mut().expect("indptr is never empty") = self.indices.len();
    }

    pub fn from_dense(a: &ComplexOperator) -> Self {
        let m = a.matrix();
        Self::from_triplets(
            a.rows(),
            a.cols(),
            (0..a.rows()).flat_map(|i| (0..a.cols()).map(move |j| (i, j, m[(i, j)]))),
        )
    }

    pub fn to_dense(&self) -> ComplexOperator {
        ComplexOperator::from_matrix(self.to_matrix())
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        match self.row_ids.binary_search(&i) {
            Ok(r) => self.stored_row(r),
            Err(_) => (&[], &[]),
        }
    }

    fn stored_row(&self, r: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn nonempty_rows(&self) -> Vec<usize> {
        self.row_ids.clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.row_ids.iter().enumerate().flat_map(move |(r, &i)| {
            let (idx, val) = self.stored_row(r);
            idx.iter().zip(val).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (idx, val) = self.row(i);
        idx.binary_search(&j).map_or(ZERO, |k| val[k])
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(i, j, v)| (i, j, v * s)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::from_triplets(self.rows, self.cols, self.iter().chain(other.iter())))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().chain(other.iter().map(|(i, j, v)| (i, j, -v))),
        ))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let mut acc: Vec<(usize, C64)> = Vec::new();
        for (r, &i) in self.row_ids.iter().enumerate() {
            acc.clear();
            let (ai, av) = self.stored_row(r);
            for (&k, &a) in ai.iter().zip(av) {
                let (bi, bv) = other.row(k);
                acc.extend(bi.iter().zip(bv).map(|(&j, &b)| (j, a * b)));
            }
            acc.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < acc.len() {
                let (j, mut v) = acc[k];
                k += 1;
                while k < acc.len() && acc[k].0 == j {
                    v += acc[k].1;
                    k += 1;
                }
                if v != ZERO {
                    out.push(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.rows];
        for (r, &i) in self.row_ids.iter().enumerate() {
            let (idx, val) = self.stored_row(r);
            y[i] = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
        y
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                t.push((i * other.rows + k, j * other.cols + l, a * b));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, t)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r, c) = (self.rows, self.cols);
        Self::from_triplets(
            r + other.rows,
            c + other.cols,
            self.iter().chain(other.iter().map(|(i, j, v)| (i + r, j + c, v))),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from A = A*.
    pub fn hermitian_drift(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.rows == self.cols
            && self.hermitian_drift() <= tol
            && self.mul(self).and_then(|pp| pp.sub(self)).map(|r| r.max_abs() <= tol).unwrap_or(false)
    }

    /// Groups of row and column indices that interact through nonzero entries.
    pub fn coupled_blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut uf = UnionFind::<usize>::new(self.rows + self.cols);
        for (i, j, _) in self.iter() {
            uf.union(i, self.rows + j);
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (i, j, _) in self.iter() {
            let root = uf.find(i);
            let g = groups.entry(root).or_default();
            g.0.push(i);
            g.1.push(j);
        }
        groups
            .into_values()
            .map(|(mut r, mut c)| {
                r.sort_unstable();
                r.dedup();
                c.sort_unstable();
                c.dedup();
                (r, c)
            })
            .collect()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
        let col_pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(p, &c)| (c, p)).collect();
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (p, &i) in rows.iter().enumerate() {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                if let Some(&q) = col_pos.get(&j) {
                    m[(p, q)] = v;
                }
            }
        }
        m
    }

    /// Largest singular value, computed independently on each coupled block.
    pub fn operator_norm(&self) -> f64 {
        self.coupled_blocks()
            .iter()
            .map(|(r, c)| dense_norm(&self.submatrix(r, c)))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dense_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    gram.symmetric_eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

pub(crate) fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.mul(b)?.sub(&b.mul(a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, real};

    fn sample() -> SparseOperator {
        SparseOperator::from_triplets(
            3,
            4,
            vec![(0, 1, c64(1.0, 2.0)), (2, 3, real(-1.0)), (0, 1, real(1.0)), (1, 0, real(0.0))],
        )
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let s = sample();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.get(0, 1), c64(2.0, 2.0));
        assert_eq!(s.get(1, 0), real(0.0));
    }

    #[test]
    fn dense_round_trip_and_products() {
        let s = sample();
        let d = s.to_dense();
        assert_eq!(SparseOperator::from_dense(&d), s);
        let p = s.mul(&s.adjoint()).unwrap().to_dense();
        let q = d.mul(&d.adjoint()).unwrap();
        assert!(p.sub(&q).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn kron_and_sum_match_dense() {
        let a = SparseOperator::from_dense(
            &ComplexOperator::from_real_rows(&[&[1.0, 2.0], &[0.0, -1.0]]).unwrap(),
        );
        let b = sample();
        let k = a.kron(&b).to_dense();
        let kd = crate::operator_core::tensor(&a.to_dense(), &b.to_dense());
        assert_eq!(k, kd);
        let s = a.direct_sum(&b).to_dense();
        assert_eq!(s, crate::operator_core::direct_sum(&a.to_dense(), &b.to_dense()));
    }

    #[test]
    fn blockwise_norm_matches_dense_norm() {
        let m = ComplexOperator::from_real_rows(&[
            &[0.0, 3.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -2.0],
            &[0.0, 0.0, 0.5, 0.0],
        ])
        .unwrap();
        let s = SparseOperator::from_dense(&m);
        assert_eq!(s.coupled_blocks().len(), 4);
        assert!((s.operator_norm() - m.operator_norm()).abs() < 1e-12);
        assert_eq!(SparseOperator::zeros(2, 2).operator_norm(), 0.0);
    }
}
