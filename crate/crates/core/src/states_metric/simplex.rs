//! Revised primal simplex on the dual of a cutting-plane LP.
//!
//! The LP is `max c·x  s.t.  a_j·x <= 1,  |x_k| <= bound`. Its dual
//! `min Σλ_j + bound·Σ(μ⁺_k + μ⁻_k)  s.t.  Σ λ_j a_j + μ⁺ − μ⁻ = c,  λ, μ >= 0`
//! is solved directly; the simplex multipliers are the primal iterate. New cuts are
//! new dual columns, so the current basis stays feasible and solving resumes warm.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Consecutive degenerate pivots after which pricing switches to Bland's rule.
const DEGENERATE_SWITCH: usize = 50;
const REFACTOR_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-11;
/// Relative size of the right-hand-side perturbation.
const PERTURBATION: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    Plus(usize),
    Minus(usize),
    Cut(usize),
}

impl Var {
    fn order(self, n: usize) -> usize {
        match self {
            Var::Plus(k) => 2 * k,
            Var::Minus(k) => 2 * k + 1,
            Var::Cut(j) => 2 * n + j,
        }
    }
}

pub(crate) struct CutLp {
    n: usize,
    cuts: Vec<DVector<f64>>,
    objective: DVector<f64>,
    bound: f64,
    basis: Vec<Var>,
    in_basis: Vec<bool>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    /// Right-hand side currently represented by `xb`, possibly perturbed.
    rhs: DVector<f64>,
    since_refactor: usize,
    rng: ChaCha8Rng,
}

impl CutLp {
    pub(crate) fn new(n: usize, bound: f64) -> Self {
        let mut lp = Self {
            n,
            cuts: Vec::new(),
            objective: DVector::zeros(n),
            bound,
            basis: Vec::new(),
            in_basis: vec![false; 2 * n],
            binv: DMatrix::identity(n, n),
            xb: DVector::zeros(n),
            rhs: DVector::zeros(n),
            since_refactor: 0,
            rng: ChaCha8Rng::seed_from_u64(0x5eed),
        };
        lp.reset_basis();
        lp
    }

    pub(crate) fn num_cuts(&self) -> usize {
        self.cuts.len()
    }

    pub(crate) fn bound(&self) -> f64 {
        self.bound
    }

    pub(crate) fn set_bound(&mut self, bound: f64) {
        self.bound = bound;
    }

    pub(crate) fn add_cut(&mut self, a: DVector<f64>) {
        debug_assert_eq!(a.len(), self.n);
        self.cuts.push(a);
        self.in_basis.push(false);
    }

    /// Replaces the objective, keeping the basis when it stays feasible.
    pub(crate) fn set_objective(&mut self, c: DVector<f64>) {
        self.objective = c;
        self.rhs = self.objective.clone();
        let xb = &self.binv * &self.objective;
        if xb.iter().all(|&v| v >= -1e-9) {
            self.xb = xb.map(|v| v.max(0.0));
        } else {
            self.reset_basis();
        }
    }

    fn reset_basis(&mut self) {
        for flag in self.in_basis.iter_mut() {
            *flag = false;
        }
        self.basis.clear();
        for k in 0..self.n {
            let v = if self.objective[k] >= 0.0 { Var::Plus(k) } else { Var::Minus(k) };
            self.in_basis[v.order(self.n)] = true;
            self.basis.push(v);
        }
        self.refactor();
    }

    fn column(&self, v: Var) -> DVector<f64> {
        match v {
            Var::Plus(k) => DVector::from_fn(self.n, |i, _| if i == k { 1.0 } else { 0.0 }),
            Var::Minus(k) => DVector::from_fn(self.n, |i, _| if i == k { -1.0 } else { 0.0 }),
            Var::Cut(j) => self.cuts[j].clone(),
        }
    }

    fn cost(&self, v: Var) -> f64 {
        match v {
            Var::Cut(_) => 1.0,
            _ => self.bound,
        }
    }

    fn refactor(&mut self) {
        let cols: Vec<DVector<f64>> = self.basis.iter().map(|&v| self.column(v)).collect();
        let b = if cols.is_empty() { DMatrix::zeros(0, 0) } else { DMatrix::from_columns(&cols) };
        // a numerically singular basis keeps its updated inverse
        if let Some(inv) = b.try_inverse() {
            self.binv = inv;
        }
        self.xb = &self.binv * &self.rhs;
        self.since_refactor = 0;
    }

    /// Whether some box multiplier is positive, i.e. the box cuts off the LP optimum.
    pub(crate) fn box_binding(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.objective.amax());
        self.basis.iter().zip(self.xb.iter()).any(|(v, &x)| !matches!(v, Var::Cut(_)) && x > tol)
    }

    /// Simplex multipliers y = B^{-T} c_B, i.e. the primal iterate.
    pub(crate) fn multipliers(&self) -> DVector<f64> {
        let cb = DVector::from_iterator(self.n, self.basis.iter().map(|&v| self.cost(v)));
        self.binv.tr_mul(&cb)
    }

    #[cfg(test)]
    /// Dual objective value, equal to c·y at optimality.
    pub(crate) fn value(&self) -> f64 {
        self.basis.iter().zip(self.xb.iter()).map(|(&v, &x)| self.cost(v) * x).sum()
    }

    fn reduced_cost(&self, v: Var, y: &DVector<f64>) -> f64 {
        match v {
            Var::Plus(k) => self.bound - y[k],
            Var::Minus(k) => self.bound + y[k],
            Var::Cut(j) => 1.0 - self.cuts[j].dot(y),
        }
    }

    fn candidates(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.n)
            .flat_map(|k| [Var::Plus(k), Var::Minus(k)])
            .chain((0..self.cuts.len()).map(Var::Cut))
            .filter(move |v| !self.in_basis[v.order(self.n)])
    }

    /// Runs simplex pivots to optimality and returns the primal iterate.
    ///
    /// The dual right-hand side is perturbed while pivoting, which breaks the heavy
    /// degeneracy of cut systems; a dual simplex pass then restores the true values.
    pub(crate) fn solve(&mut self) -> Result<DVector<f64>> {
        self.perturb();
        self.primal_phase()?;
        self.rhs = self.objective.clone();
        self.xb = &self.binv * &self.rhs;
        self.dual_cleanup()?;
        Ok(self.multipliers())
    }

    fn perturb(&mut self) {
        let scale = PERTURBATION * (1.0 + self.objective.amax());
        let base = &self.binv * &self.objective;
        let shift = DVector::from_fn(self.n, |i, _| {
            let jitter = scale * (1.0 + self.rng.gen::<f64>());
            if base[i] > jitter { 0.0 } else { jitter - base[i].min(0.0) }
        });
        let cols: Vec<DVector<f64>> = self.basis.iter().map(|&v| self.column(v)).collect();
        let mut rhs = self.objective.clone();
        for (col, s) in cols.iter().zip(shift.iter()) {
            if *s != 0.0 {
                rhs.axpy(*s, col, 1.0);
            }
        }
        self.rhs = rhs;
        self.xb = (&self.binv * &self.rhs).map(|v| v.max(0.0));
    }

    fn primal_phase(&mut self) -> Result<()> {
        let n = self.n;
        let limit = 200 * (2 * n + self.cuts.len()) + 1000;
        let mut degenerate = 0usize;
        for _ in 0..limit {
            let y = self.multipliers();
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut entering: Option<(Var, f64)> = None;
            for v in self.candidates() {
                let scale = if matches!(v, Var::Cut(_)) { 1.0 } else { self.bound.max(1.0) };
                let rc = self.reduced_cost(v, &y);
                if rc >= -PIVOT_TOL * scale {
                    continue;
                }
                if bland {
                    entering = Some((v, rc));
                    break;
                }
                let score = rc / scale;
                if entering.map_or(true, |(_, best)| score < best) {
                    entering = Some((v, score));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(());
            };
            let d = &self.binv * self.column(q);
            let pivot_floor = PIVOT_TOL.max(1e-9 * d.amax());
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..n {
                if d[i] > pivot_floor {
                    let ratio = self.xb[i] / d[i];
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            if ratio < best - 1e-14 {
                                true
                            } else if ratio <= best + 1e-14 {
                                if bland {
                                    self.basis[i].order(n) < self.basis[r].order(n)
                                } else {
                                    d[i] > d[r]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, theta)) = leave else {
                // unbounded dual means an infeasible primal, impossible since x = 0 is feasible
                return Err(Error::Numerical("cutting-plane LP lost primal feasibility".into()));
            };
            if theta <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &d);
            for v in self.xb.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Err(Error::Numerical("cutting-plane LP exceeded its pivot budget".into()))
    }

    /// Dual simplex pivots until the basic solution is nonnegative again.
    fn dual_cleanup(&mut self) -> Result<()> {
        let n = self.n;
        let tol = 1e-10 * (1.0 + self.objective.amax());
        let limit = 50 * (2 * n + self.cuts.len()) + 1000;
        for _ in 0..limit {
            let Some((r, xr)) = self.xb.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)) else {
                return Ok(());
            };
            if xr >= -tol {
                self.xb.iter_mut().for_each(|v| *v = v.max(0.0));
                return Ok(());
            }
            let row = self.binv.row(r).transpose();
            let y = self.multipliers();
            let alpha_floor = 1e-9 * row.amax();
            let mut best: Option<(Var, f64, f64)> = None;
            for v in self.candidates() {
                let alpha = match v {
                    Var::Plus(k) => row[k],
                    Var::Minus(k) => -row[k],
                    Var::Cut(j) => row.dot(&self.cuts[j]),
                };
                if alpha >= -alpha_floor {
                    continue;
                }
                let ratio = self.reduced_cost(v, &y).max(0.0) / -alpha;
                let better = match best {
                    None => true,
                    Some((_, b, a)) => ratio < b - 1e-14 || (ratio <= b + 1e-14 && -alpha > a),
                };
                if better {
                    best = Some((v, ratio, -alpha));
                }
            }
            let Some((q, _, _)) = best else {
                return Err(Error::Numerical("dual cleanup found no entering column".into()));
            };
            let d = &self.binv * self.column(q);
            self.pivot(r, q, &d);
        }
        Err(Error::Numerical("cutting-plane LP cleanup exceeded its pivot budget".into()))
    }

    /// Basis change: column `q` replaces basic position `r`; `d = B⁻¹ a_q`.
    fn pivot(&mut self, r: usize, q: Var, d: &DVector<f64>) {
        let n = self.n;
        let theta = self.xb[r] / d[r];
        self.xb.axpy(-theta, d, 1.0);
        self.xb[r] = theta;
        let row_r = self.binv.row(r).transpose() / d[r];
        let mut others = d.clone();
        others[r] = 0.0;
        self.binv.ger(-1.0, &others, &row_r, 1.0);
        self.binv.set_row(r, &row_r.transpose());
        let old = self.basis[r];
        self.in_basis[old.order(n)] = false;
        self.in_basis[q.order(n)] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }
}
