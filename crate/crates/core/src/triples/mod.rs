//! Finite spectral triples (A, H, D) with an optional grading.

mod algebra;
mod build;
pub(crate) mod clifford;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

pub use algebra::{AlgebraElement, BasisLabel, FiniteAlgebra};
pub use build::{build_f_ed, build_npoint, build_npoint_uniform, npoint_pairs, product_triple};
pub use clifford::{clifford_algebra, CliffordBasis, CLIFFORD_DROP_TOL};

use crate::error::{shape, Error, Result};
use crate::operator_core::{ComplexOperator, C64};
use crate::sparse::{commutator, SparseOperator};

/// Algebra, faithful representation given on the matrix-unit basis, Dirac operator
/// and optional grading. Operators are stored sparsely; see [`SparseOperator`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpectralTriple {
    algebra: FiniteAlgebra,
    hilbert_dim: usize,
    rep: Vec<SparseOperator>,
    dirac: SparseOperator,
    grading: Option<SparseOperator>,
}

impl FiniteSpectralTriple {
    /// Checks shapes only; use [`validate_triple`] for the algebraic invariants.
    pub fn new(
        algebra: FiniteAlgebra,
        rep: Vec<SparseOperator>,
        dirac: SparseOperator,
        grading: Option<SparseOperator>,
    ) -> Result<Self> {
        let m = dirac.rows();
        if m == 0 || dirac.cols() != m {
            return Err(shape("Dirac operator must be square and nonempty"));
        }
        if rep.len() != algebra.dim() {
            return Err(shape(format!(
                "{} representation images for an algebra of dimension {}",
                rep.len(),
                algebra.dim()
            )));
        }
        if rep.iter().any(|r| r.rows() != m || r.cols() != m) {
            return Err(shape("representation images must match the Hilbert dimension"));
        }
        if grading.as_ref().is_some_and(|g| g.rows() != m || g.cols() != m) {
            return Err(shape("grading must match the Hilbert dimension"));
        }
        Ok(Self { algebra, hilbert_dim: m, rep, dirac, grading })
    }

    pub fn from_dense(
        algebra: FiniteAlgebra,
        rep: &[ComplexOperator],
        dirac: &ComplexOperator,
        grading: Option<&ComplexOperator>,
    ) -> Result<Self> {
        Self::new(
            algebra,
            rep.iter().map(SparseOperator::from_dense).collect(),
            SparseOperator::from_dense(dirac),
            grading.map(SparseOperator::from_dense),
        )
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn rep_basis(&self) -> &[SparseOperator] {
        &self.rep
    }

    pub fn dirac(&self) -> &SparseOperator {
        &self.dirac
    }

    pub fn grading(&self) -> Option<&SparseOperator> {
        self.grading.as_ref()
    }

    /// Same algebra and representation with another Dirac operator; the grading is dropped
    /// unless it still anticommutes (callers decide by passing `keep_grading`).
    pub fn with_dirac(&self, dirac: SparseOperator, keep_grading: bool) -> Result<Self> {
        let grading = if keep_grading { self.grading.clone() } else { None };
        Self::new(self.algebra.clone(), self.rep.clone(), dirac, grading)
    }

    pub fn represent_coords(&self, coords: &[C64]) -> Result<SparseOperator> {
        if coords.len() != self.algebra.dim() {
            return Err(shape("coordinate vector does not match the algebra"));
        }
        let m = self.hilbert_dim;
        Ok(SparseOperator::from_triplets(
            m,
            m,
            coords
                .iter()
                .zip(&self.rep)
                .filter(|(c, _)| c.norm() != 0.0)
                .flat_map(|(&c, r)| r.iter().map(move |(i, j, v)| (i, j, c * v))),
        ))
    }

    pub fn represent(&self, a: &AlgebraElement) -> Result<SparseOperator> {
        self.represent_coords(&a.coords())
    }

    /// [D, π(a)].
    pub fn dirac_commutator(&self, coords: &[C64]) -> Result<SparseOperator> {
        commutator(&self.dirac, &self.represent_coords(coords)?)
    }
}

/// One failed invariant of a triple.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DiracNotSelfAdjoint { drift: f64 },
    NotUnital { residual: f64 },
    NotMultiplicative { left: usize, right: usize, residual: f64 },
    NotStarPreserving { element: usize, residual: f64 },
    NotFaithful { rank: usize, dim: usize },
    GradingNotInvolution { residual: f64 },
    GradingNotSelfAdjoint { drift: f64 },
    GradingNotOdd { residual: f64 },
    GradingNotEven { element: usize, residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DiracNotSelfAdjoint { drift } => write!(f, "Dirac operator is not self-adjoint (drift {drift:.3e})"),
            Self::NotUnital { residual } => write!(f, "representation is not unital (residual {residual:.3e})"),
            Self::NotMultiplicative { left, right, residual } => write!(
                f,
                "representation is not multiplicative on basis pair ({left}, {right}) (residual {residual:.3e})"
            ),
            Self::NotStarPreserving { element, residual } => write!(
                f,
                "representation does not preserve adjoints on basis element {element} (residual {residual:.3e})"
            ),
            Self::NotFaithful { rank, dim } => write!(f, "representation is not faithful (rank {rank} < {dim})"),
            Self::GradingNotInvolution { residual } => write!(f, "grading does not square to the identity (residual {residual:.3e})"),
            Self::GradingNotSelfAdjoint { drift } => write!(f, "grading is not self-adjoint (drift {drift:.3e})"),
            Self::GradingNotOdd { residual } => write!(f, "grading does not anticommute with the Dirac operator (residual {residual:.3e})"),
            Self::GradingNotEven { element, residual } => write!(
                f,
                "grading does not commute with the image of basis element {element} (residual {residual:.3e})"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Conditions that hold automatically in finite dimension.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        Err(Error::Validation(
            self.violations.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"),
        ))
    }
}

pub fn validate_triple(t: &FiniteSpectralTriple, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let alg = &t.algebra;
    let m = t.hilbert_dim;
    let scale = |x: f64| tol * x.max(1.0);

    let drift = t.dirac.hermitian_drift();
    if drift > scale(t.dirac.max_abs()) {
        violations.push(Violation::DiracNotSelfAdjoint { drift });
    }

    let unit = t.represent_coords(&alg.unit_coords()).expect("unit coordinates");
    let residual = unit.sub(&SparseOperator::identity(m)).expect("square").max_abs();
    if residual > tol {
        violations.push(Violation::NotUnital { residual });
    }

    let mut multiplicative = true;
    let rows: Vec<Vec<usize>> = t.rep.iter().map(|r| r.nonempty_rows()).collect();
    'pairs: for a in 0..alg.dim() {
        for b in 0..alg.dim() {
            let target = alg.basis_product(a, b).map(|c| (&t.rep[c], rows[c].as_slice()));
            let residual = product_residual((&t.rep[a], &rows[a]), &t.rep[b], target);
            if residual > tol {
                violations.push(Violation::NotMultiplicative { left: a, right: b, residual });
                multiplicative = false;
                break 'pairs;
            }
        }
    }

    for a in 0..alg.dim() {
        let residual = t.rep[a].adjoint().sub(&t.rep[alg.basis_adjoint(a)]).expect("square").max_abs();
        if residual > tol {
            violations.push(Violation::NotStarPreserving { element: a, residual });
            break;
        }
    }

    // For a *-homomorphism each simple block is either killed or embedded, so it is
    // enough to look at the block units. Otherwise fall back to a numerical rank.
    let rank = if multiplicative {
        (0..alg.num_blocks())
            .filter(|&b| t.rep[alg.index(b, 0, 0)].max_abs() > tol)
            .map(|b| alg.block_dims()[b].pow(2))
            .sum()
    } else {
        representation_rank(t)
    };
    if rank < alg.dim() {
        violations.push(Violation::NotFaithful { rank, dim: alg.dim() });
    }

    if let Some(g) = &t.grading {
        let sq = g.mul(g).expect("square").sub(&SparseOperator::identity(m)).expect("square");
        if sq.max_abs() > tol {
            violations.push(Violation::GradingNotInvolution { residual: sq.max_abs() });
        }
        let drift = g.hermitian_drift();
        if drift > tol {
            violations.push(Violation::GradingNotSelfAdjoint { drift });
        }
        let anti = g.mul(&t.dirac).expect("square").add(&t.dirac.mul(g).expect("square")).expect("square");
        if anti.max_abs() > scale(t.dirac.max_abs()) {
            violations.push(Violation::GradingNotOdd { residual: anti.max_abs() });
        }
        for (k, r) in t.rep.iter().enumerate() {
            let c = commutator(g, r).expect("square").max_abs();
            if c > tol {
                violations.push(Violation::GradingNotEven { element: k, residual: c });
                break;
            }
        }
    }

    ValidationReport {
        violations,
        notes: vec![
            "Dom(D) = H and the smooth subalgebras coincide with A in finite dimension".into(),
            "every commutator [D, π(a)] is bounded".into(),
        ],
    }
}

/// max |(xy − z)_{ij}| touching only rows where x or z are nonzero.
fn product_residual(
    x: (&SparseOperator, &[usize]),
    y: &SparseOperator,
    z: Option<(&SparseOperator, &[usize])>,
) -> f64 {
    let mut rows: Vec<usize> = x.1.to_vec();
    if let Some((_, zr)) = z {
        rows.extend_from_slice(zr);
        rows.sort_unstable();
        rows.dedup();
    }
    let mut worst = 0.0f64;
    let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
    for i in rows {
        acc.clear();
        let (xi, xv) = x.0.row(i);
        for (&k, &a) in xi.iter().zip(xv) {
            let (yi, yv) = y.row(k);
            for (&j, &b) in yi.iter().zip(yv) {
                *acc.entry(j).or_default() += a * b;
            }
        }
        if let Some((zm, _)) = z {
            let (zi, zv) = zm.row(i);
            for (&j, &c) in zi.iter().zip(zv) {
                *acc.entry(j).or_default() -= c;
            }
        }
        worst = acc.values().fold(worst, |w, v| w.max(v.norm()));
    }
    worst
}

fn representation_rank(t: &FiniteSpectralTriple) -> usize {
    let k = t.algebra.dim();
    let gram = DMatrix::<C64>::from_fn(k, k, |a, b| {
        let (ra, rb) = (&t.rep[a], &t.rep[b]);
        ra.iter().map(|(i, j, v)| v.conj() * rb.get(i, j)).sum()
    });
    let ev = gram.symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |a, &b| a.max(b));
    ev.iter().filter(|&&x| x > 1e-16 * max.max(1e-300)).count()
}

/// exp(iDt) X exp(−iDt).
pub fn dirac_flux(t: &FiniteSpectralTriple, x: &ComplexOperator, time: f64) -> Result<ComplexOperator> {
    let m = t.hilbert_dim;
    if x.rows() != m || x.cols() != m {
        return Err(shape(format!("flux of a {}x{} operator on a {m}-dimensional space", x.rows(), x.cols())));
    }
    let (values, vectors) = t.dirac.to_dense().hermitian_eigen()?;
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        values.iter().map(|&l| C64::new(0.0, l * time).exp()),
    ));
    let u = &vectors * phases * vectors.adjoint();
    Ok(ComplexOperator::from_matrix(&u * x.matrix() * u.adjoint()))
}
