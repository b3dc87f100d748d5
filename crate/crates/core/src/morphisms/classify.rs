use serde::Serialize;

use super::{
    check_coisometry, check_connes_isometric, check_embedding, check_isometric, check_riemannian,
    check_smooth_morphism, check_totally_geodesic, DistanceCheck, ResidualCheck, SmoothMorphism,
};
use crate::error::{Error, Result};
use crate::operator_core::{real, C64};
use crate::sparse::commutator;
use crate::states_metric::{compress, standard_states, DistanceOptions, PureState};
use crate::triples::FiniteAlgebra;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagResult {
    pub pass: bool,
    /// Largest algebraic residual, or largest distance gap.
    #[serde(serialize_with = "crate::io::finite_or_token")]
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl FlagResult {
    fn skipped(reason: &str) -> Self {
        Self { pass: false, residual: f64::INFINITY, detail: Some(reason.into()) }
    }
}

impl From<ResidualCheck> for FlagResult {
    fn from(c: ResidualCheck) -> Self {
        Self { pass: c.pass, residual: c.residual, detail: c.worst_basis.map(|k| format!("worst basis element {k}")) }
    }
}

impl From<DistanceCheck> for FlagResult {
    fn from(c: DistanceCheck) -> Self {
        let detail = c.worst_pair.map(|(a, b)| format!("worst pair ({a}, {b}) over {} pairs", c.pairs));
        Self { pass: c.pass, residual: c.max_gap, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub smooth_morphism: FlagResult,
    pub embedding: FlagResult,
    pub connes_isometric: FlagResult,
    pub riemannian: FlagResult,
    pub totally_geodesic: FlagResult,
    pub isometric: FlagResult,
    pub degenerate: bool,
    /// u u* = Id on H₁ with u a partial isometry.
    pub coisometry: bool,
    /// [D₂, u*u] = 0.
    pub projection_commutes: bool,
    /// ‖[PD₂P, π₂(b)]‖ = ‖[D₁, π₁(φ(b))]‖ on the basis, when it was evaluated.
    pub norm_equality: Option<FlagResult>,
    /// Implications that applied, each verified.
    pub implications: Vec<String>,
    pub states: Vec<String>,
    pub tolerance: f64,
    pub eps: f64,
}

impl ClassificationReport {
    pub fn flag(&self, name: &str) -> Option<&FlagResult> {
        match name {
            "smooth_morphism" => Some(&self.smooth_morphism),
            "embedding" => Some(&self.embedding),
            "connes_isometric" => Some(&self.connes_isometric),
            "riemannian" => Some(&self.riemannian),
            "totally_geodesic" => Some(&self.totally_geodesic),
            "isometric" => Some(&self.isometric),
            _ => None,
        }
    }
}

/// Pure states used when none are given: every evaluation and standard vector state.
pub fn default_states(alg: &FiniteAlgebra) -> Vec<PureState> {
    standard_states(alg)
}

/// Runs every subtriple check and verifies the implications between them.
pub fn classify(
    m: &SmoothMorphism,
    states: Option<&[PureState]>,
    tol: f64,
    eps: f64,
    opts: &DistanceOptions,
) -> Result<ClassificationReport> {
    let states: Vec<PureState> = match states {
        Some(s) => s.to_vec(),
        None => default_states(m.target().algebra()),
    };
    let smooth = check_smooth_morphism(m, tol)?;
    let embedding = check_embedding(m)?;
    let riemannian: FlagResult = check_riemannian(m, tol)?.into();
    let totally_geodesic: FlagResult = check_totally_geodesic(m, tol)?.into();
    let co = check_coisometry(m.u(), tol)?;
    let coisometry = co.partial_isometry && co.coisometry;
    let p = m.projection()?;
    let projection_commutes = commutator(m.source().dirac(), &p)?.operator_norm() <= tol;

    let norm_equality = if co.partial_isometry && projection_commutes {
        let compressed = compress(m.source(), &p)?;
        let mut worst = 0.0f64;
        for k in 0..m.source().algebra().dim() {
            let mut b: Vec<C64> = vec![real(0.0); m.source().algebra().dim()];
            b[k] = real(1.0);
            let lhs = compressed.dirac_commutator(&b)?.operator_norm();
            let rhs = m.target().dirac_commutator(&m.phi().apply(&b)?)?.operator_norm();
            worst = worst.max((lhs - rhs).abs());
        }
        Some(FlagResult { pass: worst <= tol, residual: worst, detail: None })
    } else {
        None
    };

    let is_embedding = smooth.pass && embedding.pass;
    let (connes_isometric, isometric) = if is_embedding {
        let connes = check_connes_isometric(m, &states, eps, opts)?.into();
        let iso = if coisometry {
            check_isometric(m, &states, eps, opts)?.into()
        } else {
            FlagResult::skipped("u is not a partial isometry onto H₁")
        };
        (connes, iso)
    } else {
        let reason = "requires an embedding";
        (FlagResult::skipped(reason), FlagResult::skipped(reason))
    };

    let mut implications = Vec::new();
    if smooth.pass && totally_geodesic.pass {
        if !riemannian.pass {
            return Err(Error::Inconsistent(format!(
                "totally geodesic (residual {:e}) but not Riemannian (residual {:e})",
                totally_geodesic.residual, riemannian.residual
            )));
        }
        implications.push("totally_geodesic => riemannian".to_string());
        if is_embedding && coisometry {
            if !isometric.pass {
                return Err(Error::Inconsistent(format!(
                    "totally geodesic co-isometry but distances differ by {:e}",
                    isometric.residual
                )));
            }
            implications.push("totally_geodesic and u u* = Id => isometric".to_string());
        }
    }
    if is_embedding && coisometry && riemannian.pass && projection_commutes {
        if let Some(eq) = norm_equality.as_ref().filter(|e| e.pass) {
            if !isometric.pass {
                return Err(Error::Inconsistent(format!(
                    "Riemannian with commuting projection and norm equality (gap {:e}) but distances differ by {:e}",
                    eq.residual, isometric.residual
                )));
            }
            implications.push("riemannian and [D, P] = 0 and norm equality => isometric".to_string());
        }
    }

    Ok(ClassificationReport {
        smooth_morphism: FlagResult {
            pass: smooth.pass,
            residual: smooth.residual,
            detail: smooth.worst_basis.filter(|_| !smooth.pass).map(|k| format!("intertwining fails on basis element {k}")),
        },
        embedding: FlagResult {
            pass: embedding.pass,
            residual: (embedding.target_dim - embedding.rank) as f64,
            detail: Some(format!("rank {} of {}", embedding.rank, embedding.target_dim)),
        },
        connes_isometric,
        riemannian,
        totally_geodesic,
        isometric,
        degenerate: smooth.degenerate,
        coisometry,
        projection_commutes,
        norm_equality,
        implications,
        states: states.iter().map(ToString::to_string).collect(),
        tolerance: tol,
        eps,
    })
}
