//! JSON and CSV interchange: triples, homomorphisms, morphisms, grid specs and reports.
//!
//! Complex numbers are `[re, im]`; dense matrices are row-major arrays of rows. Large
//! operators are written in the sparse form `{ "rows", "cols", "entries": [[i, j, [re, im]]] }`,
//! which is also accepted on input. Floats are printed with 17 significant digits and
//! non-finite values as the string tokens "inf", "-inf" and "nan".

use std::io;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::derivations::{AlgebraMap, BlockRoute};
use crate::error::{Error, Result};
use crate::hodge_discrete::{build_circle, build_torus, disjoint_union, CircleGrid, DiscreteHodgeTriple, TorusGrid, TorusMetric};
use crate::morphisms::SmoothMorphism;
use crate::operator_core::{c64, C64};
use crate::sparse::SparseOperator;
use crate::states_metric::{DistanceResult, PureState};
use crate::triples::{validate_triple, AlgebraElement, FiniteAlgebra, FiniteSpectralTriple};

/// Operators with at most this many entries are written densely.
pub const DENSE_LIMIT: usize = 4096;
/// Validation tolerance applied to every triple read from disk.
pub const LOAD_TOL: f64 = 1e-9;

pub type Complex = [f64; 2];

fn pair(z: C64) -> Complex {
    [z.re, z.im]
}

fn unpair(p: Complex) -> C64 {
    c64(p[0], p[1])
}

/// Pretty printer that writes every float with 17 significant digits.
struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17-digit floats, two-space indentation and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// `serialize_with` helper: finite floats as numbers, the rest as string tokens.
pub fn finite_or_token<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Same as [`finite_or_token`] for optional values.
pub fn option_finite_or_token<S: serde::Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => finite_or_token(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixDoc {
    Dense(Vec<Vec<Complex>>),
    Sparse { rows: usize, cols: usize, entries: Vec<(usize, usize, Complex)> },
}

impl MatrixDoc {
    pub fn from_operator(op: &SparseOperator) -> Self {
        if op.rows() * op.cols() <= DENSE_LIMIT {
            let m = op.to_matrix();
            Self::Dense((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect())
        } else {
            Self::Sparse {
                rows: op.rows(),
                cols: op.cols(),
                entries: op.iter().map(|(i, j, z)| (i, j, pair(z))).collect(),
            }
        }
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        Self::Dense((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect())
    }

    pub fn to_operator(&self) -> Result<SparseOperator> {
        match self {
            Self::Dense(rows) => {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(Error::Input("ragged matrix rows".into()));
                }
                Ok(SparseOperator::from_triplets(
                    rows.len(),
                    ncols,
                    rows.iter().enumerate().flat_map(|(i, r)| {
                        r.iter().enumerate().filter(|(_, p)| p[0] != 0.0 || p[1] != 0.0).map(move |(j, &p)| (i, j, unpair(p)))
                    }),
                ))
            }
            Self::Sparse { rows, cols, entries } => {
                if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| i >= rows || j >= cols) {
                    return Err(Error::Input(format!("entry ({i}, {j}) outside a {rows}×{cols} matrix")));
                }
                Ok(SparseOperator::from_triplets(*rows, *cols, entries.iter().map(|&(i, j, p)| (i, j, unpair(p)))))
            }
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        Ok(self.to_operator()?.to_matrix())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleDoc {
    pub blocks: Vec<usize>,
    pub hilbert_dim: usize,
    pub rep: Vec<MatrixDoc>,
    pub dirac: MatrixDoc,
    pub grading: Option<MatrixDoc>,
}

impl TripleDoc {
    pub fn from_triple(t: &FiniteSpectralTriple) -> Self {
        Self {
            blocks: t.algebra().block_dims().to_vec(),
            hilbert_dim: t.hilbert_dim(),
            rep: t.rep_basis().iter().map(MatrixDoc::from_operator).collect(),
            dirac: MatrixDoc::from_operator(t.dirac()),
            grading: t.grading().map(MatrixDoc::from_operator),
        }
    }

    /// Builds and validates the triple.
    pub fn to_triple(&self) -> Result<FiniteSpectralTriple> {
        let alg = FiniteAlgebra::new(self.blocks.clone())?;
        let rep = self.rep.iter().map(MatrixDoc::to_operator).collect::<Result<Vec<_>>>()?;
        let dirac = self.dirac.to_operator()?;
        if dirac.rows() != self.hilbert_dim {
            return Err(Error::Shape(format!(
                "hilbert_dim is {} but the Dirac operator is {}×{}",
                self.hilbert_dim,
                dirac.rows(),
                dirac.cols()
            )));
        }
        let grading = self.grading.as_ref().map(MatrixDoc::to_operator).transpose()?;
        let t = FiniteSpectralTriple::new(alg, rep, dirac, grading)?;
        validate_triple(&t, LOAD_TOL).into_result()?;
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteDoc {
    pub target_block: usize,
    pub source_block: usize,
    pub conjugation: Option<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub routing: Vec<RouteDoc>,
}

impl MapDoc {
    pub fn from_map(phi: &AlgebraMap) -> Result<Self> {
        let routes = phi
            .routing()
            .ok_or_else(|| Error::Input("homomorphism has no block routing table to write".into()))?;
        Ok(Self {
            routing: routes
                .iter()
                .map(|r| RouteDoc {
                    target_block: r.target_block,
                    source_block: r.source_block,
                    conjugation: r.conjugation.as_ref().map(MatrixDoc::from_matrix),
                })
                .collect(),
        })
    }

    pub fn to_map(&self, source: &FiniteAlgebra, target: &FiniteAlgebra) -> Result<AlgebraMap> {
        let routes = self
            .routing
            .iter()
            .map(|r| {
                Ok(BlockRoute {
                    target_block: r.target_block,
                    source_block: r.source_block,
                    conjugation: r.conjugation.as_ref().map(MatrixDoc::to_matrix).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AlgebraMap::from_routing(source, target, routes)
    }
}

/// A triple given inline or as a path relative to the referring file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TripleRef {
    Path(String),
    Inline(Box<TripleDoc>),
}

impl TripleRef {
    pub fn resolve(&self, base: &Path) -> Result<FiniteSpectralTriple> {
        match self {
            Self::Inline(doc) => doc.to_triple(),
            Self::Path(p) => read_triple(&base.join(p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub phi: MapDoc,
    pub u: MatrixDoc,
    pub source: TripleRef,
    pub target: TripleRef,
}

impl MorphismDoc {
    /// Writes source and target inline.
    pub fn from_morphism(m: &SmoothMorphism) -> Result<Self> {
        Ok(Self {
            phi: MapDoc::from_map(m.phi())?,
            u: MatrixDoc::from_operator(m.u()),
            source: TripleRef::Inline(Box::new(TripleDoc::from_triple(m.source()))),
            target: TripleRef::Inline(Box::new(TripleDoc::from_triple(m.target()))),
        })
    }

    /// `base` is the directory that relative triple paths are resolved against.
    pub fn to_morphism(&self, base: &Path) -> Result<SmoothMorphism> {
        let source = self.source.resolve(base)?;
        let target = self.target.resolve(base)?;
        let phi = self.phi.to_map(source.algebra(), target.algebra())?;
        SmoothMorphism::new(phi, self.u.to_operator()?, source.into(), target.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Circle,
    Torus,
    Union,
}

/// Grid description; `union` joins its `parts` in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ntheta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nphi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<TorusMetric>,
    /// Constant metric coefficient g on a circle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<GridSpec>,
}

impl GridSpec {
    pub fn circle(n: usize) -> Self {
        Self { kind: GridKind::Circle, n: Some(n), ntheta: None, nphi: None, c: None, metric: None, g: None, parts: Vec::new() }
    }

    pub fn torus(ntheta: usize, nphi: usize, c: f64, metric: TorusMetric) -> Self {
        Self {
            kind: GridKind::Torus,
            n: None,
            ntheta: Some(ntheta),
            nphi: Some(nphi),
            c: Some(c),
            metric: Some(metric),
            g: None,
            parts: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<DiscreteHodgeTriple> {
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::Grid(format!("{:?} grid needs \"{name}\"", self.kind)));
        match self.kind {
            GridKind::Circle => {
                let n = need(self.n, "n")?;
                let g = self.g.unwrap_or(1.0);
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::Grid(format!("metric coefficient must be positive, got {g}")));
                }
                build_circle(&CircleGrid::constant(n, g))
            }
            GridKind::Torus => {
                let (nt, np) = (need(self.ntheta, "ntheta")?, need(self.nphi, "nphi")?);
                match self.metric.unwrap_or(TorusMetric::Revolution) {
                    TorusMetric::Flat => build_torus(&TorusGrid::flat(nt, np)),
                    TorusMetric::Revolution => {
                        let c = self.c.ok_or_else(|| Error::Grid("paper_torus metric needs \"c\"".into()))?;
                        build_torus(&TorusGrid::new(nt, np, c))
                    }
                }
            }
            GridKind::Union => {
                let mut parts = self.parts.iter().map(GridSpec::build);
                let first = parts.next().ok_or_else(|| Error::Grid("union needs at least one part".into()))??;
                parts.try_fold(first, |acc, p| disjoint_union(&acc, &p?))
            }
        }
    }
}

/// Pure state on the command line and in files: `{ "block": b }` or
/// `{ "block": b, "vector": [[re, im], ...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub block: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Complex>>,
}

impl From<&StateDoc> for PureState {
    fn from(d: &StateDoc) -> Self {
        match &d.vector {
            None => PureState::evaluation(d.block),
            Some(v) => PureState::vector(d.block, v.iter().copied().map(unpair).collect()),
        }
    }
}

/// Parses a bare block index or a JSON [`StateDoc`].
pub fn parse_state(text: &str) -> Result<PureState> {
    let text = text.trim();
    if let Ok(b) = text.parse::<usize>() {
        return Ok(PureState::evaluation(b));
    }
    let doc: StateDoc = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("state {text:?} is neither a block index nor a state object: {e}")))?;
    Ok((&doc).into())
}

fn element_doc(a: &AlgebraElement) -> Vec<MatrixDoc> {
    a.blocks().iter().map(MatrixDoc::from_matrix).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceDoc {
    #[serde(serialize_with = "finite_or_token")]
    pub value: f64,
    /// Optimizing element, block by block.
    pub certificate: Vec<MatrixDoc>,
    pub iterations: usize,
    #[serde(serialize_with = "finite_or_token")]
    pub upper_bound: f64,
}

impl From<&DistanceResult> for DistanceDoc {
    fn from(r: &DistanceResult) -> Self {
        Self {
            value: r.value.as_f64(),
            certificate: element_doc(&r.certificate),
            iterations: r.iterations,
            upper_bound: r.upper_bound,
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn read_triple(path: &Path) -> Result<FiniteSpectralTriple> {
    read_json::<TripleDoc>(path)?.to_triple()
}

pub fn read_morphism(path: &Path) -> Result<SmoothMorphism> {
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    read_json::<MorphismDoc>(path)?.to_morphism(&base)
}

pub fn write_triple(t: &FiniteSpectralTriple) -> Result<String> {
    to_json_string(&TripleDoc::from_triple(t))
}

/// Writes serializable rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Input(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}
