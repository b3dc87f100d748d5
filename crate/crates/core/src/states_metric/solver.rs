//! Cutting-plane maximization of ρ(a) − σ(a) over ‖[D, π(a)]‖ ≤ 1.
//!
//! Variables are real coefficients x on a self-adjoint family S_k, so
//! [D, π(a)] = −i Σ x_k H_k with H_k = i[D, π(S_k)] Hermitian. The union sparsity
//! pattern of the H_k splits into independent blocks, each solved by a dense
//! Hermitian eigen-decomposition. Every eigenpair (λ, v) with |λ| > 1 yields the
//! valid cut sign(λ)·Σ_k x_k v*H_k v ≤ 1. Cuts are kept across state pairs.

use std::collections::{BTreeMap, HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use petgraph::unionfind::UnionFind;

use super::simplex::CutLp;
use super::State;
use crate::error::{Error, Result};
use crate::operator_core::{c64, real, C64};
use crate::sparse::commutator;
use crate::triples::{AlgebraElement, FiniteAlgebra, FiniteSpectralTriple};

const INITIAL_BOUND: f64 = 64.0;
const BOUND_GROWTH: f64 = 64.0;
const MAX_BOUND: f64 = 1e15;
const KERNEL_TOL: f64 = 1e-10;
const SEPARATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    /// Relative gap between the certified lower bound and the LP upper bound.
    pub eps: f64,
    /// Accepted excess of the commutator norm over 1.
    pub eps_feas: f64,
    pub max_iter: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { eps: 1e-6, eps_feas: 1e-8, max_iter: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    /// The value as a float, with `f64::INFINITY` for the infinite case.
    pub fn as_f64(self) -> f64 {
        match self {
            Distance::Finite(v) => v,
            Distance::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub value: Distance,
    /// Self-adjoint element with ‖[D, π(a)]‖ ≤ 1 + eps_feas attaining `value`; for an
    /// infinite distance, a direction with vanishing commutator that separates the states.
    pub certificate: AlgebraElement,
    pub iterations: usize,
    /// Best LP upper bound; equal to `value` up to the gap tolerance.
    pub upper_bound: f64,
}

struct Block {
    size: usize,
    /// (entry id, local row, local col)
    entries: Vec<(usize, usize, usize)>,
}

/// Reusable distance solver for one triple and one variable family.
pub struct DistanceSolver {
    algebra: FiniteAlgebra,
    basis: Vec<Vec<C64>>,
    contributions: Vec<Vec<(usize, C64)>>,
    blocks: Vec<Block>,
    kernel: Vec<DVector<f64>>,
    free: Vec<usize>,
    lp: CutLp,
    cut_keys: HashSet<Vec<i64>>,
    opts: DistanceOptions,
}

impl DistanceSolver {
    /// Solver over all self-adjoint elements.
    pub fn new(t: &FiniteSpectralTriple, opts: DistanceOptions) -> Result<Self> {
        let basis = t.algebra().self_adjoint_basis();
        Self::build(t, basis, opts)
    }

    /// Solver over real combinations of a self-adjoint, linearly independent family.
    pub fn restricted(t: &FiniteSpectralTriple, basis: Vec<Vec<C64>>, opts: DistanceOptions) -> Result<Self> {
        let alg = t.algebra();
        for (k, s) in basis.iter().enumerate() {
            if s.len() != alg.dim() {
                return Err(crate::error::shape(format!("family element {k} has the wrong length")));
            }
            let adj = (0..alg.dim()).map(|i| (s[alg.basis_adjoint(i)].conj() - s[i]).norm()).fold(0.0, f64::max);
            if adj > 1e-12 {
                return Err(Error::Input(format!("family element {k} is not self-adjoint")));
            }
        }
        if !basis.is_empty() {
            // independence over the reals: stack real and imaginary parts
            let m = DMatrix::from_fn(2 * alg.dim(), basis.len(), |i, k| {
                let z = basis[k][i % alg.dim()];
                if i < alg.dim() {
                    z.re
                } else {
                    z.im
                }
            });
            if crate::numeric::numerical_rank(&m) < basis.len() {
                return Err(Error::Input("family is linearly dependent".into()));
            }
        }
        Self::build(t, basis, opts)
    }

    fn build(t: &FiniteSpectralTriple, basis: Vec<Vec<C64>>, opts: DistanceOptions) -> Result<Self> {
        if !(opts.eps > 0.0 && opts.eps_feas > 0.0 && opts.max_iter > 0) {
            return Err(Error::Input("distance tolerances must be positive".into()));
        }
        let k_count = basis.len();
        let mut entry_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut positions: Vec<(usize, usize)> = Vec::new();
        let mut contributions: Vec<Vec<(usize, C64)>> = Vec::new();
        for (k, s) in basis.iter().enumerate() {
            let h = commutator(t.dirac(), &t.represent_coords(s)?)?.scale(c64(0.0, 1.0));
            for (i, j, v) in h.iter() {
                if v.norm() == 0.0 {
                    continue;
                }
                let id = *entry_ids.entry((i, j)).or_insert_with(|| {
                    positions.push((i, j));
                    contributions.push(Vec::new());
                    positions.len() - 1
                });
                contributions[id].push((k, v));
            }
        }
        let m = t.hilbert_dim();
        let mut uf = UnionFind::<usize>::new(m);
        for &(i, j) in &positions {
            uf.union(i, j);
        }
        let mut grouped: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (id, &(i, _)) in positions.iter().enumerate() {
            grouped.entry(uf.find(i)).or_default().push(id);
        }
        let mut blocks = Vec::with_capacity(grouped.len());
        for ids in grouped.into_values() {
            let mut local: BTreeMap<usize, usize> = BTreeMap::new();
            for &id in &ids {
                let (i, j) = positions[id];
                for x in [i, j] {
                    let next = local.len();
                    local.entry(x).or_insert(next);
                }
            }
            let entries = ids.iter().map(|&id| (id, local[&positions[id].0], local[&positions[id].1])).collect();
            blocks.push(Block { size: local.len(), entries });
        }

        // kernel of x ↦ Σ x_k H_k via the Gram matrix tr(H_k H_l)
        let mut gram = DMatrix::<f64>::zeros(k_count, k_count);
        for list in &contributions {
            for &(k, a) in list {
                for &(l, b) in list {
                    gram[(k, l)] += (a * b.conj()).re;
                }
            }
        }
        let kernel: Vec<DVector<f64>> = if k_count == 0 {
            Vec::new()
        } else {
            let eig = gram.symmetric_eigen();
            let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
            (0..k_count)
                .filter(|&i| eig.eigenvalues[i] <= KERNEL_TOL * lmax.max(f64::MIN_POSITIVE))
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect()
        };
        let pinned = pivot_columns(&kernel, k_count);
        let free: Vec<usize> = (0..k_count).filter(|k| !pinned.contains(k)).collect();
        let lp = CutLp::new(free.len(), INITIAL_BOUND);
        Ok(Self {
            algebra: t.algebra().clone(),
            basis,
            contributions,
            blocks,
            kernel,
            free,
            lp,
            cut_keys: HashSet::new(),
            opts,
        })
    }

    pub fn num_cuts(&self) -> usize {
        self.lp.num_cuts()
    }

    /// Dimension of the commutator kernel among the variables (constants included).
    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    /// ‖[D, π(a)]‖ for a = Σ x_k S_k.
    pub fn commutator_norm(&self, x: &[f64]) -> f64 {
        self.scan(x, 0.0).0
    }

    fn element(&self, x: &[f64]) -> AlgebraElement {
        let mut coords = vec![real(0.0); self.algebra.dim()];
        for (xk, s) in x.iter().zip(&self.basis) {
            for (c, v) in coords.iter_mut().zip(s) {
                *c += v * *xk;
            }
        }
        AlgebraElement::from_coords(&self.algebra, &coords).expect("coordinates follow the algebra")
    }

    /// Norm of Σ x_k H_k and the cuts (in full coordinates) from every eigenpair beyond `1 + slack`.
    fn scan(&self, x: &[f64], slack: f64) -> (f64, Vec<DVector<f64>>) {
        let values: Vec<C64> = self
            .contributions
            .iter()
            .map(|list| list.iter().map(|&(k, v)| v * x[k]).sum())
            .collect();
        let mut norm = 0.0f64;
        let mut cuts = Vec::new();
        for b in &self.blocks {
            let mut h = DMatrix::<C64>::zeros(b.size, b.size);
            for &(id, i, j) in &b.entries {
                h[(i, j)] = values[id];
            }
            let h = (&h + h.adjoint()) * real(0.5);
            let eig = h.symmetric_eigen();
            for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
                norm = norm.max(lambda.abs());
                if lambda.abs() <= 1.0 + slack {
                    continue;
                }
                let v = eig.eigenvectors.column(idx);
                let sign = lambda.signum();
                let mut a = DVector::<f64>::zeros(x.len());
                for &(id, i, j) in &b.entries {
                    let w = v[i].conj() * v[j];
                    for &(k, val) in &self.contributions[id] {
                        a[k] += sign * (val * w).re;
                    }
                }
                cuts.push(a);
            }
        }
        (norm, cuts)
    }

    fn add_cut(&mut self, full: &DVector<f64>) -> bool {
        let a = DVector::from_iterator(self.free.len(), self.free.iter().map(|&k| full[k]));
        let scale = a.amax();
        if scale == 0.0 {
            return false;
        }
        let key: Vec<i64> = a.iter().map(|v| (v * 1e9).round() as i64).collect();
        if !self.cut_keys.insert(key) {
            return false;
        }
        self.lp.add_cut(a);
        true
    }

    /// d(ρ, σ) over the solver's variable family.
    pub fn distance(&mut self, rho: &State, sigma: &State) -> Result<DistanceResult> {
        let wr = rho.functional(&self.algebra)?;
        let ws = sigma.functional(&self.algebra)?;
        let k_count = self.basis.len();
        let c = DVector::from_iterator(
            k_count,
            self.basis.iter().map(|s| s.iter().zip(wr.iter().zip(&ws)).map(|(si, (a, b))| ((a - b) * si).re).sum()),
        );
        let zero = AlgebraElement::zero(&self.algebra);
        let cnorm = c.norm();
        if cnorm <= 1e-14 {
            return Ok(DistanceResult { value: Distance::Finite(0.0), certificate: zero, iterations: 0, upper_bound: 0.0 });
        }
        let mut leak = DVector::<f64>::zeros(k_count);
        for n in &self.kernel {
            leak += n * n.dot(&c);
        }
        if leak.norm() > SEPARATION_TOL * cnorm {
            let dir: Vec<f64> = (leak / cnorm).iter().copied().collect();
            return Ok(DistanceResult {
                value: Distance::Infinite,
                certificate: self.element(&dir),
                iterations: 0,
                upper_bound: f64::INFINITY,
            });
        }
        let c_free = DVector::from_iterator(self.free.len(), self.free.iter().map(|&k| c[k]));
        self.lp.set_objective(c_free.clone());

        let mut best = 0.0f64;
        let mut best_x = vec![0.0; k_count];
        let mut upper = f64::INFINITY;
        for iter in 1..=self.opts.max_iter {
            let y = self.lp.solve()?;
            let mut x = vec![0.0; k_count];
            for (&k, &v) in self.free.iter().zip(y.iter()) {
                x[k] = v;
            }
            let obj = c_free.dot(&y);
            let (norm, cuts) = self.scan(&x, self.opts.eps_feas);
            let scale = norm.max(1.0);
            if obj / scale > best {
                best = obj / scale;
                best_x = x.iter().map(|v| v / scale).collect();
            }
            let bound = self.lp.bound();
            let box_active = self.lp.box_binding();
            if !box_active {
                upper = upper.min(obj);
            }
            let feasible = norm <= 1.0 + self.opts.eps_feas;
            if feasible && box_active {
                if bound * BOUND_GROWTH > MAX_BOUND {
                    return Err(Error::Numerical("distance LP stays unbounded on a finite-distance problem".into()));
                }
                self.lp.set_bound(bound * BOUND_GROWTH);
                continue;
            }
            let converged = !box_active && (feasible || upper - best <= self.opts.eps * upper.max(1.0));
            let mut added = false;
            if !converged {
                for cut in &cuts {
                    added |= self.add_cut(cut);
                }
            }
            if converged || (!added && !box_active) {
                return Ok(DistanceResult {
                    value: Distance::Finite(best),
                    certificate: self.element(&best_x),
                    iterations: iter,
                    upper_bound: upper.max(best),
                });
            }
            if !added {
                return Err(Error::Numerical("cutting planes stalled with the box active".into()));
            }
        }
        Err(Error::IterationLimit { iterations: self.opts.max_iter, lower: best, upper })
    }
}

/// Columns to pin so that the kernel directions become invertible on them
/// (Gaussian elimination with complete pivoting on the kernel basis).
fn pivot_columns(kernel: &[DVector<f64>], n: usize) -> Vec<usize> {
    if kernel.is_empty() {
        return Vec::new();
    }
    let mut m = DMatrix::from_fn(kernel.len(), n, |i, j| kernel[i][j]);
    let mut pinned = Vec::new();
    let mut used_rows = vec![false; kernel.len()];
    for _ in 0..kernel.len() {
        let mut best = (0, 0, 0.0f64);
        for i in (0..kernel.len()).filter(|&i| !used_rows[i]) {
            for j in (0..n).filter(|j| !pinned.contains(j)) {
                if m[(i, j)].abs() > best.2 {
                    best = (i, j, m[(i, j)].abs());
                }
            }
        }
        let (r, col, _) = best;
        used_rows[r] = true;
        pinned.push(col);
        let pivot_row = m.row(r).into_owned() / m[(r, col)];
        for i in (0..kernel.len()).filter(|&i| !used_rows[i]) {
            let f = m[(i, col)];
            for j in 0..n {
                m[(i, j)] -= f * pivot_row[j];
            }
        }
    }
    pinned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states_metric::PureState;
    use crate::triples::{build_npoint, build_npoint_uniform};

    fn ev(b: usize) -> State {
        State::Pure(PureState::evaluation(b))
    }

    #[test]
    fn two_point_distance_is_inverse_coupling() {
        for x in [0.5, 1.0, 2.0, 3.7] {
            let t = build_npoint_uniform(2, c64(0.0, x)).unwrap();
            let mut s = DistanceSolver::new(&t, DistanceOptions::default()).unwrap();
            let r = s.distance(&ev(0), &ev(1)).unwrap();
            assert!((r.value.as_f64() - 1.0 / x).abs() < 1e-9, "{x}: {:?}", r.value);
            let cert = r.certificate.coords();
            assert!(((cert[0] - cert[1]).re - 1.0 / x).abs() < 1e-9);
        }
    }

    #[test]
    fn same_state_and_zero_coupling() {
        let t = build_npoint_uniform(2, real(1.0)).unwrap();
        let mut s = DistanceSolver::new(&t, DistanceOptions::default()).unwrap();
        assert_eq!(s.distance(&ev(1), &ev(1)).unwrap().value, Distance::Finite(0.0));
        let t0 = build_npoint_uniform(2, real(0.0)).unwrap();
        let mut s0 = DistanceSolver::new(&t0, DistanceOptions::default()).unwrap();
        let r = s0.distance(&ev(0), &ev(1)).unwrap();
        assert_eq!(r.value, Distance::Infinite);
        let c = r.certificate.coords();
        assert!((c[0] - c[1]).re > 0.0);
    }

    #[test]
    fn three_point_space_with_unequal_couplings() {
        // d(1,2) = min(1/|x12|, 1/|x13| + 1/|x23|) for commutative point spaces
        let t = build_npoint(3, &[real(1.0), real(4.0), real(2.0)]).unwrap();
        let mut s = DistanceSolver::new(&t, DistanceOptions::default()).unwrap();
        let r = s.distance(&ev(0), &ev(1)).unwrap();
        assert!((r.value.as_f64() - 0.75).abs() < 1e-9, "{:?}", r.value);
        assert!(s.commutator_norm(&[0.0; 3]) == 0.0);
    }

    #[test]
    fn matrix_block_distance_is_finite_and_symmetric() {
        let alg = FiniteAlgebra::new(vec![2, 1]).unwrap();
        let d = crate::operator_core::ComplexOperator::from_row_major(
            3,
            3,
            vec![
                real(0.0),
                real(1.0),
                real(1.0),
                real(1.0),
                real(0.0),
                c64(0.0, 2.0),
                real(1.0),
                c64(0.0, -2.0),
                real(0.0),
            ],
        )
        .unwrap();
        let mut rep = Vec::new();
        for l in alg.labels() {
            let mut m = crate::operator_core::ComplexOperator::zeros(3, 3);
            if l.block == 0 {
                m.set(l.row, l.col, real(1.0));
            } else {
                m.set(2, 2, real(1.0));
            }
            rep.push(m);
        }
        let t = FiniteSpectralTriple::from_dense(alg, &rep, &d, None).unwrap();
        let mut s = DistanceSolver::new(&t, DistanceOptions::default()).unwrap();
        let a = State::Pure(PureState::vector(0, vec![real(1.0), real(0.0)]));
        let b = ev(1);
        let r1 = s.distance(&a, &b).unwrap();
        let r2 = s.distance(&b, &a).unwrap();
        assert!(r1.value.is_finite());
        assert!((r1.value.as_f64() - r2.value.as_f64()).abs() < 1e-6);
        let cert = r1.certificate.coords();
        let x: Vec<f64> = {
            // recover coefficients on the self-adjoint basis for the norm check
            let basis = t.algebra().self_adjoint_basis();
            let m = DMatrix::from_fn(2 * cert.len(), basis.len(), |i, k| {
                let z = basis[k][i % cert.len()];
                if i < cert.len() {
                    z.re
                } else {
                    z.im
                }
            });
            let rhs = DVector::from_fn(2 * cert.len(), |i, _| {
                let z = cert[i % cert.len()];
                if i < cert.len() {
                    z.re
                } else {
                    z.im
                }
            });
            m.svd(true, true).solve(&rhs, 1e-12).unwrap().iter().copied().collect()
        };
        assert!(s.commutator_norm(&x) <= 1.0 + 1e-8);
    }

    #[test]
    fn pivoting_pins_one_constant_per_component() {
        let k = vec![DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5])];
        assert_eq!(pivot_columns(&k, 4).len(), 1);
        let k2 = vec![DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0])];
        let p = pivot_columns(&k2, 4);
        assert_eq!(p.len(), 2);
        assert!(p.iter().any(|&c| c < 2) && p.iter().any(|&c| c >= 2));
    }
}
