use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::Serialize;

use super::{build_circle, build_torus, CircleGrid, DiscreteHodgeTriple, GridLayout, TorusGrid, TorusMetric};
use crate::error::{Error, Result};
use crate::states_metric::{connes_distance, Distance, DistanceOptions, PureState, State};

fn circle_grid(t: &DiscreteHodgeTriple) -> Result<&CircleGrid> {
    match t.layout() {
        GridLayout::Circle(g) => Ok(g),
        _ => Err(Error::Grid("expected a circle geometry".into())),
    }
}

fn torus_grid(t: &DiscreteHodgeTriple) -> Result<&TorusGrid> {
    match t.layout() {
        GridLayout::Torus(g) => Ok(g),
        _ => Err(Error::Grid("expected a torus geometry".into())),
    }
}

fn check_pair(circle: &CircleGrid, torus: &TorusGrid) -> Result<()> {
    if circle.n != torus.ntheta {
        return Err(Error::Grid(format!(
            "circle has {} vertices but the torus has {} rings",
            circle.n, torus.ntheta
        )));
    }
    Ok(())
}

/// Restriction of a torus function to the φ = 0 circle, θ ↦ (θ, 0).
pub fn pullback_function(circle: &CircleGrid, torus: &TorusGrid, values: &[f64]) -> Result<Vec<f64>> {
    check_pair(circle, torus)?;
    if values.len() != torus.num_vertices() {
        return Err(Error::Grid("torus function has the wrong length".into()));
    }
    Ok((0..circle.n).map(|i| values[torus.vertex(i, 0)]).collect())
}

/// Composition with the retraction (θ, φ) ↦ θ.
pub fn retraction_pullback(circle: &CircleGrid, torus: &TorusGrid, values: &[f64]) -> Result<Vec<f64>> {
    check_pair(circle, torus)?;
    if values.len() != circle.n {
        return Err(Error::Grid("circle function has the wrong length".into()));
    }
    let mut out = vec![0.0; torus.num_vertices()];
    for i in 0..torus.ntheta {
        for j in 0..torus.nphi {
            out[torus.vertex(i, j)] = values[i];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEqualityReport {
    pub n: usize,
    pub circle_norm: f64,
    pub torus_norm: f64,
    pub relative_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares ‖[D_circle, f*h]‖ with ‖[D_torus, F*f*h]‖ for a torus function h.
pub fn verify_commutator_norm_equality(
    circle: &DiscreteHodgeTriple,
    torus: &DiscreteHodgeTriple,
    h: &[f64],
    tolerance: f64,
) -> Result<NormEqualityReport> {
    let (cg, tg) = (circle_grid(circle)?, torus_grid(torus)?);
    let on_circle = pullback_function(cg, tg, h)?;
    let lifted = retraction_pullback(cg, tg, &on_circle)?;
    let circle_norm = circle.commutator_norm(&on_circle)?;
    let torus_norm = torus.commutator_norm(&lifted)?;
    let scale = circle_norm.max(torus_norm);
    let relative_gap = if scale == 0.0 { 0.0 } else { (circle_norm - torus_norm).abs() / scale };
    Ok(NormEqualityReport { n: cg.n, circle_norm, torus_norm, relative_gap, tolerance, pass: relative_gap <= tolerance })
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientLiftReport {
    /// Largest φ-component of the lifted gradient.
    pub vertical: f64,
    /// Largest mismatch between the θ-component and the circle gradient.
    pub horizontal: f64,
    /// Largest deviation from the exact derivative at edge midpoints, if supplied.
    pub analytic: Option<f64>,
    pub pass: bool,
}

/// Gradient of F*k on the torus against the gradient of k on the circle.
///
/// The analytic comparison allows 1/ntheta.
pub fn verify_gradient_lift(
    circle: &DiscreteHodgeTriple,
    torus: &DiscreteHodgeTriple,
    k: &[f64],
    derivative: Option<&dyn Fn(f64) -> f64>,
    tolerance: f64,
) -> Result<GradientLiftReport> {
    let (cg, tg) = (circle_grid(circle)?, torus_grid(torus)?);
    let lifted = retraction_pullback(cg, tg, k)?;
    let grad_torus = torus.finite_differences()[0].mul_vec(&torus.function_coords(&lifted)?);
    let grad_circle = circle.finite_differences()[0].mul_vec(&circle.function_coords(k)?);
    let nv = tg.num_vertices();
    let vertical = grad_torus[nv..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut horizontal = 0.0f64;
    for i in 0..tg.ntheta {
        for j in 0..tg.nphi {
            horizontal = horizontal.max((grad_torus[tg.vertex(i, j)] - grad_circle[i]).norm());
        }
    }
    let h = cg.spacing();
    let analytic = derivative.map(|dk| {
        (0..cg.n).map(|i| (grad_circle[i].re - dk((i as f64 + 0.5) * h)).abs()).fold(0.0, f64::max)
    });
    let pass = vertical <= tolerance
        && horizontal <= tolerance
        && analytic.map_or(true, |a| a <= 1.0 / tg.ntheta as f64);
    Ok(GradientLiftReport { vertical, horizontal, analytic, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackRow {
    pub n: usize,
    /// ‖h g_n‖² with the flat measure dθ dφ.
    pub torus_flat: f64,
    /// ‖h g_n‖² with the torus volume (c − sin θ) dθ dφ.
    pub torus_weighted: f64,
    /// ‖f*(h g_n)‖² on the circle.
    pub circle: f64,
    pub ratio_flat: f64,
    pub ratio_weighted: f64,
    /// ‖f*(h g_n)‖² / ‖h‖²; grows like n.
    pub circle_over_profile: f64,
}

/// Bump family g_n(φ) = √(n cos(nπφ / 2φ₀)) on |φ| < φ₀/n: ‖h g_n‖ stays fixed
/// while the restriction to φ = 0 grows like √n.
pub fn unbounded_pullback_demo(
    c: f64,
    phi0: f64,
    orders: &[usize],
    profile: &dyn Fn(f64) -> f64,
    ntheta: usize,
    cells_per_support: usize,
) -> Result<Vec<PullbackRow>> {
    if !(phi0 > 0.0 && phi0 <= PI) || !(c > 1.0) {
        return Err(Error::Input(format!("need 0 < φ₀ ≤ π and c > 1, got φ₀ = {phi0}, c = {c}")));
    }
    if cells_per_support < 3 || ntheta < 3 || orders.is_empty() || orders.contains(&0) {
        return Err(Error::Grid("quadrature grid is too coarse to resolve the bump support".into()));
    }
    let nmax = *orders.iter().max().expect("nonempty");
    let nphi = (TAU * (nmax * cells_per_support) as f64 / phi0).ceil() as usize;
    let grid = TorusGrid::new(ntheta, nphi, c);
    let (ht, hp) = (grid.htheta(), grid.hphi());
    let thetas: Vec<f64> = (0..ntheta).map(|i| i as f64 * ht).collect();
    let profile_sq: Vec<f64> = thetas.iter().map(|&t| profile(t).powi(2)).collect();
    let profile_norm: f64 = profile_sq.iter().sum::<f64>() * ht;
    let weighted_profile: f64 = profile_sq.iter().zip(&thetas).map(|(p, &t)| p * grid.radius(t)).sum::<f64>() * ht;
    orders
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let bump_sq = |phi: f64| {
                if phi.abs() < phi0 / nf {
                    nf * (nf * PI * phi / (2.0 * phi0)).cos()
                } else {
                    0.0
                }
            };
            let fiber: f64 = (0..nphi)
                .map(|j| {
                    let phi = j as f64 * hp;
                    bump_sq(if phi >= PI { phi - TAU } else { phi })
                })
                .sum::<f64>()
                * hp;
            let torus_flat = profile_norm * fiber;
            let torus_weighted = weighted_profile * fiber;
            let circle = profile_norm * bump_sq(0.0);
            Ok(PullbackRow {
                n,
                torus_flat,
                torus_weighted,
                circle,
                ratio_flat: circle / torus_flat,
                ratio_weighted: circle / torus_weighted,
                circle_over_profile: circle / profile_norm,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ImmersionReport {
    pub samples: usize,
    /// max |Jᵀ g_M(f(x)) J − g_N(x)| over samples.
    pub max_residual: f64,
    pub pass: bool,
}

/// Checks f*g_M = g_N at sample points with central-difference tangents.
pub fn check_riemannian_immersion(
    samples: &[Vec<f64>],
    map: &dyn Fn(&[f64]) -> Vec<f64>,
    source_metric: &dyn Fn(&[f64]) -> DMatrix<f64>,
    target_metric: &dyn Fn(&[f64]) -> DMatrix<f64>,
    step: f64,
    tolerance: f64,
) -> Result<ImmersionReport> {
    if !(step > 0.0) {
        return Err(Error::Input("difference step must be positive".into()));
    }
    let mut max_residual = 0.0f64;
    for x in samples {
        let p = x.len();
        let y = map(x);
        let q = y.len();
        let mut jac = DMatrix::<f64>::zeros(q, p);
        for k in 0..p {
            let mut fwd = x.clone();
            let mut bwd = x.clone();
            fwd[k] += step;
            bwd[k] -= step;
            let (yf, yb) = (map(&fwd), map(&bwd));
            for r in 0..q {
                jac[(r, k)] = (yf[r] - yb[r]) / (2.0 * step);
            }
        }
        let smallest = jac.clone().svd(false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if p > q || smallest < 1e-12 {
            return Err(Error::Precondition(format!("degenerate tangent map at {x:?}")));
        }
        let gm = target_metric(&y);
        let gn = source_metric(x);
        if gm.shape() != (q, q) || gn.shape() != (p, p) {
            return Err(Error::Shape(format!("metric shapes do not match dimensions {p} and {q}")));
        }
        let pulled = jac.transpose() * gm * &jac;
        max_residual = max_residual.max((pulled - gn).amax());
    }
    Ok(ImmersionReport { samples: samples.len(), max_residual, pass: max_residual <= tolerance })
}

#[derive(Clone, Debug, Serialize)]
pub struct AmbientShortcutReport {
    /// Distance along the parallel θ = 0 as a circle with its induced metric.
    pub intrinsic: f64,
    pub ambient_lower: f64,
    /// Certified cutting-plane upper bound for the torus distance.
    pub ambient_upper: f64,
    pub shortcut: bool,
}

/// Antipodal points of the non-geodesic parallel θ = 0: the torus distance is
/// strictly below the circle's own distance because paths can dip toward the inner rim.
pub fn ambient_shortcut_demo(ntheta: usize, nphi: usize, c: f64, opts: &DistanceOptions) -> Result<AmbientShortcutReport> {
    if nphi % 2 != 0 {
        return Err(Error::Grid("the parallel needs an even number of vertices".into()));
    }
    let tgrid = TorusGrid { ntheta, nphi, c, metric: TorusMetric::Revolution };
    let radius = tgrid.radius(0.0);
    let circle = build_circle(&CircleGrid::constant(nphi, radius * radius))?;
    let ev = |b: usize| State::Pure(PureState::evaluation(b));
    let intrinsic = connes_distance(circle.triple(), &ev(0), &ev(nphi / 2), opts)?.value.as_f64();
    let torus = build_torus(&tgrid)?;
    let (rho, sigma) = (ev(tgrid.vertex(0, 0)), ev(tgrid.vertex(0, nphi / 2)));
    let (ambient_lower, ambient_upper) = match connes_distance(torus.triple(), &rho, &sigma, opts) {
        Ok(r) => match r.value {
            Distance::Finite(v) => (v, r.upper_bound),
            Distance::Infinite => (f64::INFINITY, f64::INFINITY),
        },
        Err(Error::IterationLimit { lower, upper, .. }) => (lower, upper),
        Err(e) => return Err(e),
    };
    Ok(AmbientShortcutReport { intrinsic, ambient_lower, ambient_upper, shortcut: ambient_upper < intrinsic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge_discrete::{sample_circle, sample_torus};

    #[test]
    fn pullbacks_round_trip() {
        let (cg, tg) = (CircleGrid::flat(5), TorusGrid::new(5, 4, 3.0));
        let k: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let lifted = retraction_pullback(&cg, &tg, &k).unwrap();
        assert_eq!(pullback_function(&cg, &tg, &lifted).unwrap(), k);
        assert!(retraction_pullback(&CircleGrid::flat(6), &tg, &[0.0; 6]).is_err());
    }

    #[test]
    fn norm_equality_tightens_with_refinement() {
        let mut gaps = Vec::new();
        for n in [32, 64, 128] {
            let cg = CircleGrid::flat(n);
            let tg = TorusGrid::new(n, 8, 3.0);
            let (circle, torus) = (build_circle(&cg).unwrap(), build_torus(&tg).unwrap());
            let h = sample_torus(&tg, |th, _| th.cos());
            let report = verify_commutator_norm_equality(&circle, &torus, &h, 0.03).unwrap();
            assert!(report.pass, "{report:?}");
            gaps.push(report.relative_gap);
        }
        assert!(gaps[1] <= gaps[0] * 1.1 && gaps[2] <= gaps[1] * 1.1, "{gaps:?}");
    }

    #[test]
    fn lifted_gradient_is_horizontal() {
        let cg = CircleGrid::flat(48);
        let tg = TorusGrid::new(48, 12, 3.0);
        let (circle, torus) = (build_circle(&cg).unwrap(), build_torus(&tg).unwrap());
        let k = sample_circle(&cg, f64::cos);
        let neg_sin = |t: f64| -t.sin();
        let report = verify_gradient_lift(&circle, &torus, &k, Some(&neg_sin), 1e-12).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.vertical, 0.0);
    }

    #[test]
    fn bump_family_norms() {
        let phi0 = 0.5;
        let rows = unbounded_pullback_demo(3.0, phi0, &[1, 2, 4, 8, 16], &|t: f64| 1.0 + 0.5 * t.cos(), 64, 24).unwrap();
        let fixed = 4.0 * phi0 / PI;
        for r in &rows {
            let profile = r.circle / r.n as f64;
            assert!((r.torus_flat / profile - fixed).abs() < 0.01 * fixed, "{r:?}");
            assert!((r.circle_over_profile - r.n as f64).abs() < 1e-12);
        }
        for w in rows.windows(2) {
            assert!(w[1].ratio_flat > w[0].ratio_flat && w[1].ratio_weighted > w[0].ratio_weighted);
        }
        assert!(unbounded_pullback_demo(3.0, phi0, &[4], &|_| 1.0, 64, 1).is_err());
    }

    #[test]
    fn immersions_of_the_circle() {
        let c = 3.0;
        let torus_metric = move |y: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, (c - y[0].sin()).powi(2)]);
        let samples: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.5]).collect();
        let flat = |_: &[f64]| DMatrix::from_element(1, 1, 1.0);
        let meridian = |x: &[f64]| vec![x[0], 0.0];
        let ok = check_riemannian_immersion(&samples, &meridian, &flat, &torus_metric, 1e-5, 1e-6).unwrap();
        assert!(ok.pass, "{ok:?}");
        let parallel = |x: &[f64]| vec![0.3, x[0]];
        let off = check_riemannian_immersion(&samples, &parallel, &flat, &torus_metric, 1e-5, 1e-6).unwrap();
        assert!(!off.pass);
        let induced = move |_: &[f64]| DMatrix::from_element(1, 1, (c - 0.3f64.sin()).powi(2));
        assert!(check_riemannian_immersion(&samples, &parallel, &induced, &torus_metric, 1e-5, 1e-6).unwrap().pass);
        let constant = |_: &[f64]| vec![0.0, 0.0];
        assert!(check_riemannian_immersion(&samples, &constant, &flat, &torus_metric, 1e-5, 1e-6).is_err());
    }
}
