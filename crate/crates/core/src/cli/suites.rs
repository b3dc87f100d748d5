use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Suite;
use crate::derivations::derivation_space;
use crate::error::{Error, Result};
use crate::hodge_discrete::{
    build_circle, build_torus, sample_circle, sample_torus, unbounded_pullback_demo, verify_commutator_norm_equality,
    verify_gradient_lift, CircleGrid, TorusGrid,
};
use crate::io::finite_or_token;
use crate::morphisms::random::{random_riemannian_commuting, random_totally_geodesic};
use crate::morphisms::{
    check_coisometry, check_compression_monotonicity, check_isometric, check_norm_restriction, check_riemannian,
    check_totally_geodesic, classify, clifford_expectation_check, default_states, examples, SmoothMorphism,
    DEFAULT_TOL,
};
use crate::operator_core::real;
use crate::sparse::commutator;
use crate::states_metric::{connes_distance, DistanceOptions, PureState, State};
use crate::triples::{build_npoint_uniform, FiniteAlgebra};

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub pass: bool,
    #[serde(serialize_with = "finite_or_token")]
    pub value: f64,
    #[serde(serialize_with = "finite_or_token")]
    pub tolerance: f64,
    pub detail: Option<String>,
}

impl CaseReport {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: value <= tolerance, value, tolerance, detail: None }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormRow {
    pub grid: String,
    pub function: String,
    #[serde(rename = "norm_N")]
    pub norm_n: f64,
    #[serde(rename = "norm_M")]
    pub norm_m: f64,
    pub rel_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub cases: Vec<CaseReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub norm_table: Vec<NormRow>,
}

pub fn run_suite(suite: Suite, seed: u64, tol_rel: f64) -> Result<SuiteReport> {
    let (name, cases, norm_table) = match suite {
        Suite::WorkedExamples => ("paper-examples", worked_examples()?, Vec::new()),
        Suite::HodgeConvergence => {
            let (cases, table) = hodge_convergence(tol_rel)?;
            ("hodge-convergence", cases, table)
        }
        Suite::Implications => ("implications", implications(seed)?, Vec::new()),
    };
    Ok(SuiteReport { suite: name.into(), seed, pass: cases.iter().all(|c| c.pass), cases, norm_table })
}

fn ev(b: usize) -> State {
    State::Pure(PureState::evaluation(b))
}

fn worked_examples() -> Result<Vec<CaseReport>> {
    let mut cases = Vec::new();
    let opts = DistanceOptions::default();
    for x in [0.5, 1.0, 2.0] {
        let t = build_npoint_uniform(2, real(x))?;
        let d = connes_distance(&t, &ev(0), &ev(1), &opts)?.value.as_f64();
        cases.push(CaseReport::at_most(format!("two_point x={x}"), (d - 1.0 / x).abs(), 1e-6));
    }
    let t = build_npoint_uniform(2, real(0.0))?;
    let d = connes_distance(&t, &ev(0), &ev(1), &opts)?.value.as_f64();
    cases.push(CaseReport {
        name: "two_point x=0".into(),
        pass: d.is_infinite(),
        value: d,
        tolerance: f64::INFINITY,
        detail: Some("distance must be infinite".into()),
    });

    for n in 3..=5 {
        let pairs = n * (n - 1) / 2;
        let couplings: Vec<_> = (0..pairs).map(|k| real(1.0 + 0.25 * k as f64)).collect();
        let m = examples::npoint_chain(n, &couplings)?;
        cases.push(CaseReport::at_most(format!("chain N={n} riemannian"), check_riemannian(&m, 1e-12)?.residual, 1e-12));
        cases.push(CaseReport::at_most(
            format!("chain N={n} totally_geodesic"),
            check_totally_geodesic(&m, 1e-12)?.residual,
            1e-12,
        ));
        cases.push(consistency_case(format!("chain N={n} classification"), &m, 1e-4)?);
    }

    let m = examples::circle_fed(&CircleGrid::flat(32), real(1.0))?;
    let p = m.projection()?;
    cases.push(CaseReport::at_most("circle_fed n=32 riemannian", check_riemannian(&m, 1e-10)?.residual, 1e-10));
    cases.push(CaseReport::at_most(
        "circle_fed n=32 [D, P]",
        commutator(m.source().dirac(), &p)?.operator_norm(),
        1e-12,
    ));
    let basis = m.source().algebra().self_adjoint_basis();
    cases.push(CaseReport::at_most(
        "circle_fed n=32 norm restriction",
        check_norm_restriction(m.source(), &p, &basis, 1e-10)?.residual,
        1e-10,
    ));
    let states = default_states(m.target().algebra());
    let iso = check_isometric(&m, &states, 1e-3, &opts)?;
    cases.push(CaseReport::at_most("circle_fed n=32 isometric", iso.max_gap, 1e-3).with_detail(format!("{} pairs", iso.pairs)));

    for (name, m) in [
        ("F3 -> F2", examples::npoint_chain(3, &[real(1.0), real(0.5), real(2.0)])?),
        ("F_ED", examples::fed_finite(real(1.0))?),
    ] {
        let c = clifford_expectation_check(&m, 1e-9)?;
        cases.push(
            CaseReport::at_most(format!("clifford {name} idempotent"), c.idempotent_residual, 1e-12)
                .with_detail(format!("ranks {} / {} / {}", c.rank_sub, c.rank_compressed, c.rank_joint)),
        );
        cases.push(CaseReport {
            name: format!("clifford {name} span"),
            pass: c.pass,
            value: c.multiplicative_residual.max(c.star_residual),
            tolerance: 1e-9,
            detail: None,
        });
    }

    for blocks in [vec![1, 1], vec![2], vec![2, 1], vec![3], vec![2, 2], vec![4]] {
        let alg = FiniteAlgebra::new(blocks.clone())?;
        let expected: usize = blocks.iter().map(|n| n * n - 1).sum();
        let got = derivation_space(&alg).dim();
        cases.push(CaseReport {
            name: format!("derivations {blocks:?}"),
            pass: got == expected,
            value: got as f64,
            tolerance: expected as f64,
            detail: Some(format!("expected {expected}")),
        });
    }
    Ok(cases)
}

/// Classification must complete without an inconsistency and agree with the construction.
fn consistency_case(name: String, m: &SmoothMorphism, eps: f64) -> Result<CaseReport> {
    match classify(m, None, DEFAULT_TOL, eps, &DistanceOptions::default()) {
        Ok(r) => Ok(CaseReport {
            name,
            pass: r.riemannian.pass && r.totally_geodesic.pass && r.isometric.pass,
            value: r.isometric.residual,
            tolerance: eps,
            detail: Some(r.implications.join("; ")),
        }),
        Err(Error::Inconsistent(msg)) => {
            Ok(CaseReport { name, pass: false, value: f64::NAN, tolerance: eps, detail: Some(msg) })
        }
        Err(e) => Err(e),
    }
}

fn hodge_convergence(tol_rel: f64) -> Result<(Vec<CaseReport>, Vec<NormRow>)> {
    type Profile = fn(f64) -> f64;
    let functions: [(&str, Profile); 3] =
        [("cos(theta)", f64::cos), ("sin(2theta)", |t| (2.0 * t).sin()), ("cos(3theta)", |t| (3.0 * t).cos())];
    let c = 3.0;
    let mut cases = Vec::new();
    let mut table = Vec::new();
    let mut gaps = vec![Vec::new(); functions.len()];
    for n in [32, 64, 128] {
        let circle = build_circle(&CircleGrid::flat(n))?;
        let tgrid = TorusGrid::new(n, n, c);
        let torus = build_torus(&tgrid)?;
        for (k, (name, f)) in functions.iter().enumerate() {
            let h = sample_torus(&tgrid, |t, _| f(t));
            let r = verify_commutator_norm_equality(&circle, &torus, &h, tol_rel)?;
            table.push(NormRow {
                grid: format!("{n}x{n}"),
                function: (*name).into(),
                norm_n: r.circle_norm,
                norm_m: r.torus_norm,
                rel_gap: r.relative_gap,
            });
            gaps[k].push(r.relative_gap);
            if n == 64 {
                cases.push(CaseReport::at_most(format!("norm gap {name} 64x64"), r.relative_gap, tol_rel));
            }
        }
        if n == 64 {
            let k = sample_circle(&CircleGrid::flat(n), f64::cos);
            let lift = verify_gradient_lift(&circle, &torus, &k, Some(&|t: f64| -t.sin()), 1e-10)?;
            cases.push(CaseReport::at_most("gradient lift vertical", lift.vertical, 1e-10));
            cases.push(CaseReport::at_most("gradient lift horizontal", lift.horizontal, 1e-10));
            cases.push(CaseReport::at_most(
                "gradient lift analytic",
                lift.analytic.unwrap_or(f64::INFINITY),
                1.0 / n as f64,
            ));
        }
    }
    for (k, (name, _)) in functions.iter().enumerate() {
        // monotone along refinements, allowing 10% noise
        let worst = gaps[k].windows(2).map(|w| w[1] / w[0].max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        cases.push(
            CaseReport::at_most(format!("norm gap {name} decreasing"), worst, 1.1)
                .with_detail(format!("gaps {:?}", gaps[k])),
        );
    }
    let rows = unbounded_pullback_demo(c, FRAC_PI_2, &[1, 4, 16], &|t: f64| 1.0 + 0.5 * t.cos(), 64, 8)?;
    let base = rows[0].ratio_flat;
    let worst = rows.iter().map(|r| (r.ratio_flat / (base * r.n as f64) - 1.0).abs()).fold(0.0, f64::max);
    cases.push(CaseReport::at_most("unbounded pullback ratio grows like n", worst, 0.1));
    Ok((cases, table))
}

fn implications(seed: u64) -> Result<Vec<CaseReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = DistanceOptions::default();
    let eps = 1e-4;
    let (mut riem_fail, mut iso_fail, mut worst_riem, mut worst_iso, mut inconsistent) = (0, 0, 0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let m = random_totally_geodesic(&mut rng)?;
        let r = check_riemannian(&m, 1e-9)?;
        worst_riem = worst_riem.max(r.residual);
        riem_fail += usize::from(!r.pass);
        let states = default_states(m.target().algebra());
        if states.len() >= 2 && check_coisometry(m.u(), 1e-9)?.coisometry {
            let iso = check_isometric(&m, &states, eps, &opts)?;
            worst_iso = worst_iso.max(iso.max_gap);
            iso_fail += usize::from(!iso.pass);
        }
        if let Err(Error::Inconsistent(_)) = classify(&m, None, 1e-9, eps, &opts) {
            inconsistent += 1;
        }
    }
    let mut mono_fail = 0;
    let mut worst_mono = 0.0f64;
    for _ in 0..100 {
        let m = random_riemannian_commuting(&mut rng)?;
        let states = default_states(m.target().algebra());
        if states.len() < 2 {
            continue;
        }
        let c = check_compression_monotonicity(&m, &states, eps, &opts)?;
        worst_mono = worst_mono.max(c.max_gap);
        mono_fail += usize::from(!c.pass);
    }
    let count = |name: &str, fails: usize, worst: f64, tol: f64| CaseReport {
        name: name.into(),
        pass: fails == 0,
        value: worst,
        tolerance: tol,
        detail: Some(format!("{fails} of 100 failed")),
    };
    Ok(vec![
        count("totally geodesic => riemannian", riem_fail, worst_riem, 1e-9),
        count("totally geodesic and u u* = Id => isometric", iso_fail, worst_iso, eps),
        count("riemannian with [D, P] = 0 => d_D1 <= d_PDP", mono_fail, worst_mono, eps),
        count("classification consistent", inconsistent, inconsistent as f64, 0.0),
    ])
}
