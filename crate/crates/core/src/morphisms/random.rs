//! Random morphisms that are totally geodesic, or Riemannian with [D₂, P] = 0, by
//! construction. Both are written in a random unitary frame of H₂.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use super::SmoothMorphism;
use crate::derivations::AlgebraMap;
use crate::error::Result;
use crate::operator_core::{c64, real, ComplexOperator, C64};
use crate::sparse::SparseOperator;
use crate::triples::{FiniteAlgebra, FiniteSpectralTriple};

fn random_hermitian(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()).map(|z| z * 0.5)
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.qr().q()
}

/// Representation matrices on a Hilbert space built from copies of algebra blocks.
fn rep_on_copies(alg: &FiniteAlgebra, copies: &[usize]) -> Vec<DMatrix<C64>> {
    let m: usize = copies.iter().map(|&b| alg.block_dims()[b]).sum();
    let mut rep = vec![DMatrix::zeros(m, m); alg.dim()];
    let mut offset = 0;
    for &b in copies {
        let n = alg.block_dims()[b];
        for j in 0..n {
            for k in 0..n {
                rep[alg.index(b, j, k)][(offset + j, offset + k)] = real(1.0);
            }
        }
        offset += n;
    }
    rep
}

/// Hermitian element of the commutant of the representation on `copies`.
fn random_commutant(rng: &mut impl Rng, alg: &FiniteAlgebra, copies: &[usize]) -> DMatrix<C64> {
    let offsets: Vec<usize> = copies
        .iter()
        .scan(0, |acc, &b| {
            let o = *acc;
            *acc += alg.block_dims()[b];
            Some(o)
        })
        .collect();
    let m: usize = copies.iter().map(|&b| alg.block_dims()[b]).sum();
    let mut z = DMatrix::zeros(m, m);
    for b in 0..alg.num_blocks() {
        let mine: Vec<usize> = (0..copies.len()).filter(|&i| copies[i] == b).map(|i| offsets[i]).collect();
        let y = random_hermitian(rng, mine.len());
        for (s, &os) in mine.iter().enumerate() {
            for (t, &ot) in mine.iter().enumerate() {
                for j in 0..alg.block_dims()[b] {
                    z[(os + j, ot + j)] = y[(s, t)];
                }
            }
        }
    }
    z
}

struct Layout {
    sub: FiniteAlgebra,
    ambient: FiniteAlgebra,
    sub_copies: Vec<usize>,
    extra_copies: Vec<usize>,
}

fn random_layout(rng: &mut impl Rng) -> Layout {
    let sub_dims: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=2)).collect();
    let extra_dims: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(1..=2)).collect();
    let k = sub_dims.len();
    let sub = FiniteAlgebra::new(sub_dims.clone()).expect("positive block sizes");
    let ambient = FiniteAlgebra::new(sub_dims.iter().chain(&extra_dims).copied().collect()).expect("positive");
    let mut sub_copies = Vec::new();
    for b in 0..k {
        for _ in 0..rng.gen_range(1..=2) {
            sub_copies.push(b);
        }
    }
    let mut extra_copies: Vec<usize> = (k..ambient.num_blocks()).collect();
    for _ in 0..rng.gen_range(0..=2) {
        extra_copies.push(rng.gen_range(0..ambient.num_blocks()));
    }
    if extra_copies.is_empty() {
        extra_copies.push(rng.gen_range(0..k));
    }
    Layout { sub, ambient, sub_copies, extra_copies }
}

fn assemble(rng: &mut impl Rng, layout: &Layout, sub_dirac: DMatrix<C64>, ambient_dirac_top: DMatrix<C64>) -> Result<SmoothMorphism> {
    let sub_rep = rep_on_copies(&layout.sub, &layout.sub_copies);
    let ambient_on_sub: Vec<usize> = layout.sub_copies.clone();
    let all_copies: Vec<usize> = ambient_on_sub.iter().chain(&layout.extra_copies).copied().collect();
    let ambient_rep = rep_on_copies(&layout.ambient, &all_copies);
    let m1 = sub_dirac.nrows();
    let m2 = ambient_rep[0].nrows();
    let extra = random_hermitian(rng, m2 - m1);
    let mut d2 = DMatrix::zeros(m2, m2);
    d2.view_mut((0, 0), (m1, m1)).copy_from(&ambient_dirac_top);
    d2.view_mut((m1, m1), (m2 - m1, m2 - m1)).copy_from(&extra);
    let w = random_unitary(rng, m2);
    let frame = |a: &DMatrix<C64>| SparseOperator::from_dense(&ComplexOperator::from_matrix(&w * a * w.adjoint()));
    let mut u: DMatrix<C64> = DMatrix::zeros(m1, m2);
    u.view_mut((0, 0), (m1, m1)).fill_with_identity();
    let u = SparseOperator::from_dense(&ComplexOperator::from_matrix(u * w.adjoint()));
    let sparse = |a: &DMatrix<C64>| SparseOperator::from_dense(&ComplexOperator::from_matrix(a.clone()));
    let sub = FiniteSpectralTriple::new(layout.sub.clone(), sub_rep.iter().map(sparse).collect(), sparse(&sub_dirac), None)?;
    let ambient = FiniteSpectralTriple::new(
        layout.ambient.clone(),
        ambient_rep.iter().map(frame).collect(),
        frame(&d2),
        None,
    )?;
    let phi = AlgebraMap::projection(&layout.ambient, &(0..layout.sub.num_blocks()).collect::<Vec<_>>())?;
    SmoothMorphism::new(phi, u, Arc::new(ambient), Arc::new(sub))
}

/// D₂ = D₁ ⊕ D_extra in a random frame, u the projection onto the first summand.
pub fn random_totally_geodesic(rng: &mut impl Rng) -> Result<SmoothMorphism> {
    let layout = random_layout(rng);
    let m1: usize = layout.sub_copies.iter().map(|&b| layout.sub.block_dims()[b]).sum();
    let d1 = random_hermitian(rng, m1);
    assemble(rng, &layout, d1.clone(), d1)
}

/// D₂ = (D₁ + Z) ⊕ D_extra with Z Hermitian in the commutant of π₁(A₁): Riemannian
/// with [D₂, P] = 0, and generically not totally geodesic.
pub fn random_riemannian_commuting(rng: &mut impl Rng) -> Result<SmoothMorphism> {
    let layout = random_layout(rng);
    let m1: usize = layout.sub_copies.iter().map(|&b| layout.sub.block_dims()[b]).sum();
    let d1 = random_hermitian(rng, m1);
    let z = random_commutant(rng, &layout.sub, &layout.sub_copies);
    let top = &d1 + z;
    assemble(rng, &layout, d1, top)
}
