use nalgebra::{DMatrix, DVector};

use crate::error::{shape, Error, Result};
use crate::numeric::numerical_rank;
use crate::operator_core::{real, C64};
use crate::triples::{AlgebraElement, FiniteAlgebra};

/// Homomorphism residual tolerance when verifying a linear map.
const HOM_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-10;

/// One target block receives a source block, optionally conjugated: b_t = U a_s U*.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRoute {
    pub target_block: usize,
    pub source_block: usize,
    pub conjugation: Option<DMatrix<C64>>,
}

/// Linear map between finite algebras, verified to be a unital *-homomorphism.
///
/// Stored as a matrix on coordinates: `target.dim() × source.dim()`.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    source: FiniteAlgebra,
    target: FiniteAlgebra,
    matrix: DMatrix<C64>,
    routing: Option<Vec<BlockRoute>>,
}

impl AlgebraMap {
    pub fn identity(alg: &FiniteAlgebra) -> Self {
        let routes = (0..alg.num_blocks())
            .map(|b| BlockRoute { target_block: b, source_block: b, conjugation: None })
            .collect();
        Self::from_routing(alg, alg, routes).expect("identity routing is valid")
    }

    /// Keeps the listed source blocks, in order, as the target algebra.
    pub fn projection(source: &FiniteAlgebra, keep: &[usize]) -> Result<Self> {
        let dims = keep
            .iter()
            .map(|&b| source.block_dims().get(b).copied().ok_or_else(|| Error::Input(format!("no block {b}"))))
            .collect::<Result<Vec<_>>>()?;
        let target = FiniteAlgebra::new(dims)?;
        let routes = keep
            .iter()
            .enumerate()
            .map(|(t, &s)| BlockRoute { target_block: t, source_block: s, conjugation: None })
            .collect();
        Self::from_routing(source, &target, routes)
    }

    pub fn from_routing(source: &FiniteAlgebra, target: &FiniteAlgebra, routes: Vec<BlockRoute>) -> Result<Self> {
        let mut seen = vec![false; target.num_blocks()];
        let mut matrix = DMatrix::zeros(target.dim(), source.dim());
        for r in &routes {
            if r.target_block >= target.num_blocks() || r.source_block >= source.num_blocks() {
                return Err(Error::Input(format!(
                    "route {} <- {} refers to a missing block",
                    r.target_block, r.source_block
                )));
            }
            if std::mem::replace(&mut seen[r.target_block], true) {
                return Err(Error::Input(format!("target block {} routed twice", r.target_block)));
            }
            let n = target.block_dims()[r.target_block];
            if source.block_dims()[r.source_block] != n {
                return Err(Error::Input(format!(
                    "block sizes differ on route {} <- {}",
                    r.target_block, r.source_block
                )));
            }
            let u = match &r.conjugation {
                Some(u) => {
                    if u.nrows() != n || u.ncols() != n {
                        return Err(shape(format!("conjugation on block {} is not {n}×{n}", r.target_block)));
                    }
                    let drift = (u.adjoint() * u - DMatrix::identity(n, n)).camax();
                    if drift > UNITARY_TOL {
                        return Err(Error::Input(format!(
                            "conjugation on block {} is not unitary (residual {drift:e})",
                            r.target_block
                        )));
                    }
                    u.clone()
                }
                None => DMatrix::identity(n, n),
            };
            for l in 0..n {
                for m in 0..n {
                    let row = target.index(r.target_block, l, m);
                    for j in 0..n {
                        for k in 0..n {
                            let col = source.index(r.source_block, j, k);
                            matrix[(row, col)] = u[(l, j)] * u[(m, k)].conj();
                        }
                    }
                }
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::Input(format!("target block {t} has no route")));
        }
        Ok(Self { source: source.clone(), target: target.clone(), matrix, routing: Some(routes) })
    }

    /// Wraps an arbitrary coordinate matrix after checking the homomorphism identities
    /// on the basis multiplication table.
    pub fn from_matrix(source: &FiniteAlgebra, target: &FiniteAlgebra, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(shape(format!(
                "map matrix is {}×{}, expected {}×{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        let map = Self { source: source.clone(), target: target.clone(), matrix, routing: None };
        map.verify_homomorphism()?;
        Ok(map)
    }

    fn verify_homomorphism(&self) -> Result<()> {
        let image = |k: usize| -> AlgebraElement {
            let col: Vec<C64> = self.matrix.column(k).iter().copied().collect();
            AlgebraElement::from_coords(&self.target, &col).expect("column has target shape")
        };
        let unit = self.apply(&self.source.unit_coords())?;
        let unit_res = unit
            .iter()
            .zip(self.target.unit_coords())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if unit_res > HOM_TOL {
            return Err(Error::NotHomomorphism(format!("not unital (residual {unit_res:e})")));
        }
        let images: Vec<AlgebraElement> = (0..self.source.dim()).map(image).collect();
        for a in 0..self.source.dim() {
            let adj = images[self.source.basis_adjoint(a)].sub_max(&images[a].adjoint());
            if adj > HOM_TOL {
                return Err(Error::NotHomomorphism(format!("not *-preserving on basis element {a}")));
            }
            for b in 0..self.source.dim() {
                let lhs = match self.source.basis_product(a, b) {
                    Some(p) => images[p].clone(),
                    None => AlgebraElement::zero(&self.target),
                };
                let rhs = images[a].mul(&images[b])?;
                let res = lhs.sub_max(&rhs);
                if res > HOM_TOL {
                    return Err(Error::NotHomomorphism(format!(
                        "not multiplicative on basis pair ({a}, {b}) (residual {res:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &FiniteAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FiniteAlgebra {
        &self.target
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn routing(&self) -> Option<&[BlockRoute]> {
        self.routing.as_deref()
    }

    pub fn apply(&self, coords: &[C64]) -> Result<Vec<C64>> {
        if coords.len() != self.source.dim() {
            return Err(shape("coordinates do not match the source algebra"));
        }
        Ok((&self.matrix * DVector::from_column_slice(coords)).iter().copied().collect())
    }

    pub fn apply_element(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        AlgebraElement::from_coords(&self.target, &self.apply(&a.coords())?)
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix)
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.target.dim()
    }

    pub fn ensure_surjective(&self) -> Result<()> {
        let rank = self.rank();
        if rank == self.target.dim() {
            Ok(())
        } else {
            Err(Error::NotSurjective { rank, target_dim: self.target.dim() })
        }
    }
}

impl AlgebraElement {
    fn sub_max(&self, other: &Self) -> f64 {
        self.add(&other.scale(real(-1.0))).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }
}
