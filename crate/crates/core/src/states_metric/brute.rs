use serde::{Deserialize, Serialize};

use super::State;
use crate::error::{Error, Result};
use crate::operator_core::{real, ComplexOperator, C64};
use crate::triples::FiniteSpectralTriple;

/// Grid of points k·step with |k·step| ≤ half_width in each free coordinate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub step: f64,
}

const MAX_DIM: usize = 4;
const MAX_POINTS: f64 = 5e7;

/// Exhaustive grid search over real functions on at most four points, with the
/// first coordinate pinned to zero.
pub fn brute_force_distance(t: &FiniteSpectralTriple, rho: &State, sigma: &State, grid: &GridSpec) -> Result<f64> {
    let alg = t.algebra();
    if !alg.is_commutative() || alg.dim() > MAX_DIM {
        return Err(Error::Input(format!(
            "grid search needs a commutative algebra of dimension <= {MAX_DIM}, got blocks {:?}",
            alg.block_dims()
        )));
    }
    if !(grid.step > 0.0 && grid.half_width >= 0.0) {
        return Err(Error::Input("grid step must be positive".into()));
    }
    let n = alg.dim();
    let wr = rho.functional(alg)?;
    let ws = sigma.functional(alg)?;
    let diff: Vec<f64> = wr.iter().zip(&ws).map(|(a, b)| (a - b).re).collect();
    let kmax = (grid.half_width / grid.step + 1e-9).floor() as i64;
    let side = (2 * kmax + 1) as f64;
    if side.powi(n as i32 - 1) > MAX_POINTS {
        return Err(Error::Input("grid has too many points".into()));
    }
    let comms: Vec<ComplexOperator> = (0..n)
        .map(|k| {
            let mut c = vec![real(0.0); n];
            c[k] = real(1.0);
            t.dirac_commutator(&c).map(|s| s.to_dense())
        })
        .collect::<Result<_>>()?;
    let m = t.hilbert_dim();
    let mut best = 0.0f64;
    let mut idx = vec![-kmax; n - 1];
    loop {
        let mut a = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            a[k + 1] = i as f64 * grid.step;
        }
        let obj: f64 = a.iter().zip(&diff).map(|(x, w)| x * w).sum();
        if obj > best {
            let mut c = ComplexOperator::zeros(m, m);
            for (x, op) in a.iter().zip(&comms) {
                if *x != 0.0 {
                    c = c.add(&op.scale(C64::new(*x, 0.0)))?;
                }
            }
            if c.operator_norm() <= 1.0 + 1e-12 {
                best = obj;
            }
        }
        // odometer over the free coordinates
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(best);
            }
            if idx[pos] < kmax {
                idx[pos] += 1;
                break;
            }
            idx[pos] = -kmax;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states_metric::PureState;
    use crate::triples::build_npoint_uniform;

    fn ev(b: usize) -> State {
        State::Pure(PureState::evaluation(b))
    }

    #[test]
    fn two_point_grid_value() {
        let t = build_npoint_uniform(2, real(2.0)).unwrap();
        let g = GridSpec { half_width: 2.0, step: 0.01 };
        let v = brute_force_distance(&t, &ev(1), &ev(0), &g).unwrap();
        assert!((v - 0.5).abs() <= 0.01);
        assert_eq!(brute_force_distance(&t, &ev(0), &ev(0), &g).unwrap(), 0.0);
    }

    #[test]
    fn refinement_never_decreases() {
        let t = build_npoint_uniform(3, real(1.3)).unwrap();
        let mut prev = 0.0;
        for step in [0.4, 0.2, 0.1, 0.05] {
            let v = brute_force_distance(&t, &ev(2), &ev(0), &GridSpec { half_width: 1.6, step }).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn large_algebras_are_rejected() {
        let t = build_npoint_uniform(5, real(1.0)).unwrap();
        let g = GridSpec { half_width: 1.0, step: 0.5 };
        assert!(brute_force_distance(&t, &ev(0), &ev(1), &g).is_err());
    }
}
