//! Dense complex operators on finite-dimensional Hilbert spaces.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{shape, Error, Result};

pub type C64 = Complex<f64>;

/// Default tolerance attached to eigen-solver based norms.
pub const TAU_EIG: f64 = 1e-10;
/// Largest entrywise deviation from Hermiticity tolerated before symmetrizing.
pub const HERMITIAN_DRIFT: f64 = 1e-8;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Dense complex matrix; entries are exposed in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    mat: DMatrix<C64>,
}

impl ComplexOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { mat: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: DMatrix::identity(n, n) }
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(shape("operators need at least one row and one column"));
        }
        if entries.len() != rows * cols {
            return Err(shape(format!(
                "{} entries given for a {rows}x{cols} operator",
                entries.len()
            )));
        }
        Ok(Self { mat: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    /// Real entries, one slice per row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(shape("ragged rows"));
            }
            entries.extend(row.iter().map(|&x| real(x)));
        }
        Self::from_row_major(r, c, entries)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self { mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] = value;
    }

    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { mat: &self.mat * s }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self { mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { mat: &self.mat - &other.mat })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(shape(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, read off the spectrum of [[0, A], [A*, 0]].
    pub fn operator_norm(&self) -> f64 {
        let (r, c) = (self.rows(), self.cols());
        if self.mat.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return 0.0;
        }
        let mut dil = DMatrix::<C64>::zeros(r + c, r + c);
        dil.view_mut((0, r), (r, c)).copy_from(&self.mat);
        dil.view_mut((r, 0), (c, r)).copy_from(&self.mat.adjoint());
        dil.symmetric_eigenvalues().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// (A + A*)/2, refusing inputs that drift from Hermitian by more than `HERMITIAN_DRIFT`.
    pub fn hermitian_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(shape("Hermitian part of a non-square operator"));
        }
        let adj = self.mat.adjoint();
        let drift = (&self.mat - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if drift > HERMITIAN_DRIFT * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian(drift));
        }
        Ok(Self { mat: (&self.mat + adj) * real(0.5) })
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian operator.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let h = self.hermitian_part()?;
        let n = h.rows();
        let eig = h.mat.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }
}

pub fn commutator(a: &ComplexOperator, b: &ComplexOperator) -> Result<ComplexOperator> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(shape(format!(
            "commutator needs equal square operators, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(ComplexOperator { mat: &a.mat * &b.mat - &b.mat * &a.mat })
}

pub fn direct_sum(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    let mut mat = DMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    mat.view_mut((0, 0), (a.rows(), a.cols())).copy_from(&a.mat);
    mat.view_mut((a.rows(), a.cols()), (b.rows(), b.cols())).copy_from(&b.mat);
    ComplexOperator { mat }
}

pub fn tensor(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    ComplexOperator { mat: a.mat.kronecker(&b.mat) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialIsometryReport {
    pub partial_isometry: bool,
    pub residual: f64,
    /// u u* = Id on the target space.
    pub coisometry: bool,
    pub coisometry_residual: f64,
}

pub fn partial_isometry_report(u: &ComplexOperator, tol: f64) -> PartialIsometryReport {
    let uu = &u.mat * u.mat.adjoint();
    let residual = ComplexOperator { mat: &uu * &u.mat - &u.mat }.operator_norm();
    let co = ComplexOperator { mat: uu - DMatrix::identity(u.rows(), u.rows()) }.operator_norm();
    PartialIsometryReport {
        partial_isometry: residual <= tol,
        residual,
        coisometry: co <= tol,
        coisometry_residual: co,
    }
}

pub fn is_partial_isometry(u: &ComplexOperator, tol: f64) -> bool {
    partial_isometry_report(u, tol).partial_isometry
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(entries: &[[f64; 2]], n: usize) -> ComplexOperator {
        let m = ComplexOperator::from_row_major(
            n,
            n,
            entries.iter().map(|e| c64(e[0], e[1])).collect(),
        )
        .unwrap();
        m.add(&m.adjoint()).unwrap()
    }

    #[test]
    fn identity_commutes() {
        let b = herm(&[[1.0, 0.0], [2.0, 1.0], [0.5, -1.0], [3.0, 0.0]], 2);
        let c = commutator(&ComplexOperator::identity(2), &b).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn two_point_commutator_closed_form() {
        let x = c64(0.3, -1.2);
        let (a1, a2) = (0.7, -2.0);
        let d = ComplexOperator::from_row_major(2, 2, vec![real(0.0), x, x.conj(), real(0.0)]).unwrap();
        let a = ComplexOperator::from_diagonal(&[real(a1), real(a2)]);
        let c = commutator(&d, &a).unwrap();
        let expected = ComplexOperator::from_row_major(
            2,
            2,
            vec![real(0.0), x * (a2 - a1), x.conj() * (a1 - a2), real(0.0)],
        )
        .unwrap();
        assert!(c.sub(&expected).unwrap().max_abs() < 1e-15);
        assert!((c.operator_norm() - x.norm() * (a2 - a1).abs()).abs() < 1e-12);
    }

    #[test]
    fn commutator_rejects_shape_mismatch() {
        let r = commutator(&ComplexOperator::identity(2), &ComplexOperator::identity(3));
        assert!(matches!(r, Err(Error::Shape(_))));
        let r = commutator(&ComplexOperator::zeros(2, 3), &ComplexOperator::zeros(2, 3));
        assert!(r.is_err());
    }

    #[test]
    fn norms_of_simple_operators() {
        assert_eq!(ComplexOperator::zeros(3, 2).operator_norm(), 0.0);
        let d = ComplexOperator::from_diagonal(&[real(2.0), real(-3.0)]);
        assert!((d.operator_norm() - 3.0).abs() < TAU_EIG);
    }

    #[test]
    fn sums_and_tensors() {
        let z = ComplexOperator::zeros(1, 1);
        let s = direct_sum(&z, &z);
        assert_eq!((s.rows(), s.cols()), (2, 2));
        assert_eq!(s.max_abs(), 0.0);
        let df = ComplexOperator::identity(4);
        assert_eq!(tensor(&ComplexOperator::identity(2), &df).rows(), 8);
    }

    #[test]
    fn kronecker_matches_entrywise_definition() {
        let d = c64(0.4, 0.9);
        let a = ComplexOperator::from_diagonal(&[real(1.0), real(-1.0)]);
        let b = ComplexOperator::from_row_major(2, 2, vec![real(0.0), d, d.conj(), real(0.0)]).unwrap();
        let k = tensor(&a, &b);
        for i in 0..4 {
            for j in 0..4 {
                let expected = a.get(i / 2, j / 2) * b.get(i % 2, j % 2);
                assert_eq!(k.get(i, j), expected);
            }
        }
        assert_eq!(k.get(2, 3), -d);
    }

    #[test]
    fn partial_isometries() {
        let mut u = ComplexOperator::zeros(2, 4);
        u.set(0, 0, real(1.0));
        u.set(1, 1, real(1.0));
        let rep = partial_isometry_report(&u, 1e-12);
        assert!(rep.partial_isometry && rep.coisometry);
        assert!(!is_partial_isometry(&u.scale(real(2.0)), 1e-9));
    }

    #[test]
    fn row_major_round_trip() {
        let e: Vec<C64> = (0..6).map(|k| c64(k as f64, -(k as f64))).collect();
        let a = ComplexOperator::from_row_major(2, 3, e.clone()).unwrap();
        assert_eq!(a.entries(), e);
        assert_eq!(a.get(1, 0), e[3]);
        assert!(ComplexOperator::from_row_major(2, 2, e).is_err());
    }

    #[test]
    fn hermitian_part_guards_drift() {
        let mut a = ComplexOperator::identity(2);
        a.set(0, 1, real(1e-3));
        assert!(matches!(a.hermitian_part(), Err(Error::NotHermitian(_))));
        a.set(0, 1, real(1e-12));
        let h = a.hermitian_part().unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }
}
