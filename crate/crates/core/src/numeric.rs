//! Small dense linear-algebra helpers shared by the rank decisions.

use std::collections::BTreeMap;

use nalgebra::{ComplexField, DMatrix, DVector};
use petgraph::unionfind::UnionFind;

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

fn padded<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = DMatrix::zeros(m.ncols(), m.ncols());
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    }
}

pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Number of singular values above `RANK_TOL · σ_max`.
pub fn numerical_rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Orthonormal basis of {x : m x ≈ 0}, with singular values at or below `threshold` counted as zero.
pub fn nullspace_with<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, threshold: f64) -> Vec<DVector<T>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..n).map(|k| DVector::from_fn(n, |i, _| if i == k { T::one() } else { T::zero() })).collect();
    }
    let svd = padded(m).svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(k, _)| vt.row(k).transpose().map(|z| z.conjugate()))
        .collect()
}

/// Nullspace with the relative threshold `RANK_TOL · σ_max`.
pub fn nullspace<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<DVector<T>> {
    let smax = singular_values(m).into_iter().fold(0.0, f64::max);
    nullspace_with(m, RANK_TOL * smax)
}

/// Nullspace of a sparse real system, solved component by component.
///
/// Rows are lists of (column, coefficient). Columns coupled through no row are
/// split into independent dense problems; the rank threshold is `RANK_TOL` times
/// the largest singular value over all components. Returned vectors are sparse.
pub fn sparse_nullspace(rows: &[Vec<(usize, f64)>], ncols: usize) -> Vec<Vec<(usize, f64)>> {
    let mut uf = UnionFind::<usize>::new(ncols);
    let mut touched = vec![false; ncols];
    for row in rows {
        for w in row.windows(2) {
            uf.union(w[0].0, w[1].0);
        }
        for &(c, _) in row {
            touched[c] = true;
        }
    }
    let mut comps: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for c in 0..ncols {
        if touched[c] {
            comps.entry(uf.find(c)).or_default().0.push(c);
        }
    }
    for (r, row) in rows.iter().enumerate() {
        if let Some(&(c, _)) = row.first() {
            comps.get_mut(&uf.find(c)).expect("row columns are touched").1.push(r);
        }
    }
    let mut dense = Vec::new();
    let mut smax = 0.0f64;
    for (cols, row_ids) in comps.values() {
        let local: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut m = DMatrix::<f64>::zeros(row_ids.len().max(cols.len()), cols.len());
        for (i, &r) in row_ids.iter().enumerate() {
            for &(c, v) in &rows[r] {
                m[(i, local[&c])] += v;
            }
        }
        smax = smax.max(singular_values(&m).into_iter().fold(0.0, f64::max));
        dense.push((cols, m));
    }
    let mut out: Vec<Vec<(usize, f64)>> = (0..ncols).filter(|&c| !touched[c]).map(|c| vec![(c, 1.0)]).collect();
    for (cols, m) in dense {
        for v in nullspace_with(&m, RANK_TOL * smax) {
            out.push(cols.iter().zip(v.iter()).filter(|(_, x)| x.abs() > 1e-15).map(|(&c, &x)| (c, x)).collect());
        }
    }
    out
}
