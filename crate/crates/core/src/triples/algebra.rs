use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::operator_core::{real, C64};

/// Direct sum of full matrix blocks M_{n_1} ⊕ ... ⊕ M_{n_k}.
///
/// The coordinate basis is the list of matrix units, block by block, each block
/// in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    block_dims: Vec<usize>,
}

/// Position of a matrix unit E_{row,col} inside a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisLabel {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl FiniteAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::Input(format!("invalid block profile {block_dims:?}")));
        }
        Ok(Self { block_dims })
    }

    /// ℂ^n as n blocks of size one.
    pub fn commutative(n: usize) -> Self {
        Self { block_dims: vec![1; n.max(1)] }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn block_offset(&self, block: usize) -> usize {
        self.block_dims[..block].iter().map(|n| n * n).sum()
    }

    pub fn index(&self, block: usize, row: usize, col: usize) -> usize {
        let n = self.block_dims[block];
        debug_assert!(row < n && col < n);
        self.block_offset(block) + row * n + col
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        let mut rest = index;
        for (block, &n) in self.block_dims.iter().enumerate() {
            if rest < n * n {
                return BasisLabel { block, row: rest / n, col: rest % n };
            }
            rest -= n * n;
        }
        panic!("basis index {index} out of range for dimension {}", self.dim())
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        (0..self.dim()).map(|k| self.label(k)).collect()
    }

    /// E_a E_b, which for matrix units is either zero or another matrix unit.
    pub fn basis_product(&self, a: usize, b: usize) -> Option<usize> {
        let (la, lb) = (self.label(a), self.label(b));
        (la.block == lb.block && la.col == lb.row).then(|| self.index(la.block, la.row, lb.col))
    }

    pub fn basis_adjoint(&self, a: usize) -> usize {
        let l = self.label(a);
        self.index(l.block, l.col, l.row)
    }

    pub fn unit_coords(&self) -> Vec<C64> {
        let mut c = vec![real(0.0); self.dim()];
        for (b, &n) in self.block_dims.iter().enumerate() {
            for j in 0..n {
                c[self.index(b, j, j)] = real(1.0);
            }
        }
        c
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement::from_coords(self, &self.unit_coords()).expect("unit has algebra shape")
    }

    /// Real basis of the self-adjoint part: E_jj, E_jk + E_kj and i(E_jk − E_kj) for j < k.
    pub fn self_adjoint_basis(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(self.dim());
        for (b, &n) in self.block_dims.iter().enumerate() {
            for j in 0..n {
                for k in j..n {
                    let mut v = vec![real(0.0); self.dim()];
                    if j == k {
                        v[self.index(b, j, j)] = real(1.0);
                        out.push(v);
                    } else {
                        v[self.index(b, j, k)] = real(1.0);
                        v[self.index(b, k, j)] = real(1.0);
                        out.push(v);
                        let mut w = vec![real(0.0); self.dim()];
                        w[self.index(b, j, k)] = C64::new(0.0, 1.0);
                        w[self.index(b, k, j)] = C64::new(0.0, -1.0);
                        out.push(w);
                    }
                }
            }
        }
        out
    }

    /// Algebra with the given block removed.
    pub fn without_block(&self, block: usize) -> Result<Self> {
        let mut dims = self.block_dims.clone();
        dims.remove(block);
        Self::new(dims)
    }
}

/// An element of a [`FiniteAlgebra`], stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn zero(alg: &FiniteAlgebra) -> Self {
        Self { blocks: alg.block_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect() }
    }

    pub fn from_blocks(alg: &FiniteAlgebra, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        let ok = blocks.len() == alg.num_blocks()
            && blocks
                .iter()
                .zip(&alg.block_dims)
                .all(|(m, &n)| m.nrows() == n && m.ncols() == n);
        if !ok {
            return Err(shape("element blocks do not match the algebra's block profile"));
        }
        Ok(Self { blocks })
    }

    pub fn from_coords(alg: &FiniteAlgebra, coords: &[C64]) -> Result<Self> {
        if coords.len() != alg.dim() {
            return Err(shape(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                alg.dim()
            )));
        }
        let mut blocks = Vec::with_capacity(alg.num_blocks());
        let mut off = 0;
        for &n in &alg.block_dims {
            blocks.push(DMatrix::from_row_slice(n, n, &coords[off..off + n * n]));
            off += n * n;
        }
        Ok(Self { blocks })
    }

    /// Commutative element (a_1, ..., a_n) of ℂ^n.
    pub fn from_values(values: &[C64]) -> Self {
        Self { blocks: values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect() }
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &DMatrix<C64> {
        &self.blocks[b]
    }

    pub fn coords(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for m in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(m[(i, j)]);
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect() })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { blocks: self.blocks.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check(&self, other: &Self) -> Result<()> {
        let ok = self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a.shape() == b.shape());
        if ok {
            Ok(())
        } else {
            Err(shape("elements belong to different algebras"))
        }
    }
}
