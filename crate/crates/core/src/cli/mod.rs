//! Command-line front end. `run` returns the rendered report and whether every
//! requested check passed; `main` maps that onto exit codes 0, 1 and 2.

mod suites;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use suites::{run_suite, CaseReport, NormRow, SuiteReport};

use crate::error::{Error, Result};
use crate::hodge_discrete::{CircleGrid, TorusGrid, TorusMetric};
use crate::io::{self, DistanceDoc, GridSpec, MorphismDoc, StateDoc};
use crate::morphisms::{self, classify, examples, ClassificationReport, SmoothMorphism};
use crate::operator_core::{c64, real};
use crate::states_metric::{standard_states, DistanceOptions, DistanceSolver, PureState, State};
use crate::triples::{build_f_ed, build_npoint_uniform, validate_triple, FiniteSpectralTriple};

#[derive(Debug, Parser)]
#[command(name = "ncgeom", version, about = "Finite spectral triples, Connes distances and subtriple checks")]
pub struct Cli {
    /// Algebraic residual tolerance τ.
    #[arg(long, global = true, default_value_t = morphisms::DEFAULT_TOL)]
    pub tol: f64,
    /// Distance tolerance: solver relative gap for `distance`, equality tolerance for `classify`.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Relative tolerance for discretization comparisons.
    #[arg(long = "tol-rel", global = true, default_value_t = 0.05)]
    pub tol_rel: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a triple, grid triple or worked morphism and write it as JSON.
    Build {
        #[command(subcommand)]
        kind: BuildKind,
    },
    /// Connes distance between two pure states of a triple file.
    Distance {
        triple: PathBuf,
        /// Block index for an evaluation state, or {"block": b, "vector": [[re, im], ...]}.
        #[arg(long)]
        rho: String,
        #[arg(long)]
        sigma: String,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
    /// Classify a morphism file; exits 0 iff every required flag passes.
    Classify {
        morphism: PathBuf,
        /// "standard", "evaluations", a JSON array of states, or @path to one.
        #[arg(long, default_value = "standard")]
        states: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "smooth-morphism")]
        require: Vec<Flag>,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Subcommand)]
pub enum BuildKind {
    /// N-point space with every pair coupled by x.
    Npoint {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x_im: f64,
    },
    /// Two-point gauge triple with coupling d.
    FEd {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        d: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        d_im: f64,
    },
    /// Hodge triple of a circle grid with constant metric g.
    Circle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
    },
    /// Hodge triple of a torus grid.
    Torus {
        #[arg(long)]
        ntheta: usize,
        #[arg(long)]
        nphi: usize,
        #[arg(long, default_value_t = 3.0)]
        c: f64,
        #[arg(long)]
        flat: bool,
    },
    /// Hodge triple from a grid spec file.
    Grid { spec: PathBuf },
    /// Worked morphism with source and target inline.
    Morphism {
        #[command(subcommand)]
        example: MorphismKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum MorphismKind {
    /// F_n → F_{n−1}, dropping the last point.
    Chain {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
    },
    /// Gauge triple onto its first point with doubled spinors.
    Fed {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        d: f64,
    },
    /// Circle × gauge triple onto the circle with doubled spinors.
    CircleFed {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        d: f64,
    },
    /// Torus onto its parallel θ = 0.
    Parallel {
        #[arg(long)]
        ntheta: usize,
        #[arg(long)]
        nphi: usize,
        #[arg(long, default_value_t = 3.0)]
        c: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Flag {
    SmoothMorphism,
    Embedding,
    ConnesIsometric,
    Riemannian,
    TotallyGeodesic,
    Isometric,
}

impl Flag {
    fn key(self) -> &'static str {
        match self {
            Flag::SmoothMorphism => "smooth_morphism",
            Flag::Embedding => "embedding",
            Flag::ConnesIsometric => "connes_isometric",
            Flag::Riemannian => "riemannian",
            Flag::TotallyGeodesic => "totally_geodesic",
            Flag::Isometric => "isometric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(name = "paper-examples")]
    WorkedExamples,
    HodgeConvergence,
    Implications,
}

/// Rendered output and the check verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

/// Exit code for an error: 1 for failed or inconclusive checks, 2 for bad input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistent(_) | Error::IterationLimit { .. } | Error::Numerical(_) => 1,
        _ => 2,
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("--{name} must be positive, got {v}")))
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    positive("tol", cli.tol)?;
    positive("tol-rel", cli.tol_rel)?;
    if let Some(e) = cli.eps {
        positive("eps", e)?;
    }
    match &cli.command {
        Command::Build { kind } => build(kind, cli),
        Command::Distance { triple, rho, sigma, max_iter } => distance(triple, rho, sigma, *max_iter, cli),
        Command::Classify { morphism, states, require } => classify_file(morphism, states, require, cli),
        Command::Verify { suite } => {
            let report = run_suite(*suite, cli.seed, cli.tol_rel)?;
            let text = match cli.format {
                Format::Json => io::to_json_string(&report)?,
                Format::Csv if report.norm_table.is_empty() => io::to_csv(&report.cases)?,
                Format::Csv => io::to_csv(&report.norm_table)?,
            };
            Ok(Outcome { text, success: report.pass })
        }
    }
}

fn json_only(cli: &Cli, what: &str) -> Result<()> {
    match cli.format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::Input(format!("{what} output is JSON only"))),
    }
}

fn build(kind: &BuildKind, cli: &Cli) -> Result<Outcome> {
    json_only(cli, "build")?;
    let triple: FiniteSpectralTriple = match kind {
        BuildKind::Npoint { n, x, x_im } => build_npoint_uniform(*n, c64(*x, *x_im))?,
        BuildKind::FEd { d, d_im } => build_f_ed(c64(*d, *d_im)),
        BuildKind::Circle { n, g } => GridSpec { g: Some(*g), ..GridSpec::circle(*n) }.build()?.into_triple(),
        BuildKind::Torus { ntheta, nphi, c, flat } => {
            let metric = if *flat { TorusMetric::Flat } else { TorusMetric::Revolution };
            GridSpec::torus(*ntheta, *nphi, *c, metric).build()?.into_triple()
        }
        BuildKind::Grid { spec } => io::read_json::<GridSpec>(spec)?.build()?.into_triple(),
        BuildKind::Morphism { example } => {
            let m = build_morphism(example)?;
            return Ok(Outcome { text: io::to_json_string(&MorphismDoc::from_morphism(&m)?)?, success: true });
        }
    };
    validate_triple(&triple, cli.tol).into_result()?;
    Ok(Outcome { text: io::write_triple(&triple)?, success: true })
}

fn build_morphism(kind: &MorphismKind) -> Result<SmoothMorphism> {
    match kind {
        MorphismKind::Chain { n, x } => {
            let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
            examples::npoint_chain(*n, &vec![real(*x); pairs])
        }
        MorphismKind::Fed { d } => examples::fed_finite(real(*d)),
        MorphismKind::CircleFed { n, d } => examples::circle_fed(&CircleGrid::flat(*n), real(*d)),
        MorphismKind::Parallel { ntheta, nphi, c } => examples::parallel_in_torus(&TorusGrid::new(*ntheta, *nphi, *c)),
    }
}

fn distance(path: &PathBuf, rho: &str, sigma: &str, max_iter: usize, cli: &Cli) -> Result<Outcome> {
    json_only(cli, "distance")?;
    let t = io::read_triple(path)?;
    let (rho, sigma) = (io::parse_state(rho)?, io::parse_state(sigma)?);
    let defaults = DistanceOptions::default();
    let opts = DistanceOptions { eps: cli.eps.unwrap_or(defaults.eps), max_iter, ..defaults };
    let result = DistanceSolver::new(&t, opts)?.distance(&State::Pure(rho), &State::Pure(sigma))?;
    Ok(Outcome { text: io::to_json_string(&DistanceDoc::from(&result))?, success: true })
}

fn parse_states(selector: &str, m: &SmoothMorphism) -> Result<Vec<PureState>> {
    let alg = m.target().algebra();
    let states = match selector.trim() {
        "standard" => standard_states(alg),
        "evaluations" => standard_states(alg).into_iter().filter(|s| matches!(s, PureState::Evaluation { .. })).collect(),
        text => {
            let docs: Vec<StateDoc> = match text.strip_prefix('@') {
                Some(path) => io::read_json(path.as_ref())?,
                None => serde_json::from_str(text).map_err(|e| Error::Input(format!("--states: {e}")))?,
            };
            docs.iter().map(PureState::from).collect()
        }
    };
    for s in &states {
        s.validate(alg)?;
    }
    if states.len() < 2 {
        return Err(Error::Input(format!("state selector {selector:?} gives fewer than two states")));
    }
    Ok(states)
}

fn classify_file(path: &PathBuf, selector: &str, require: &[Flag], cli: &Cli) -> Result<Outcome> {
    json_only(cli, "classify")?;
    let m = io::read_morphism(path)?;
    let states = parse_states(selector, &m)?;
    let eps = cli.eps.unwrap_or(morphisms::DEFAULT_EPS);
    let report: ClassificationReport = classify(&m, Some(&states), cli.tol, eps, &DistanceOptions::default())?;
    let success = require.iter().all(|f| report.flag(f.key()).is_some_and(|r| r.pass));
    Ok(Outcome { text: io::to_json_string(&report)?, success })
}

/// Parses arguments, runs, writes the report and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(outcome.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.success {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests;
