//! C interface to `ncgeom`.
//!
//! Objects cross the boundary as opaque handles created by the constructor calls
//! and released by the matching `*_free`. Every fallible call returns an
//! [`NcgeomStatus`]; on failure the message is available from
//! [`ncgeom_last_error`]. Strings handed out by the library must be released with
//! [`ncgeom_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ncgeom::io::{self, DistanceDoc, MorphismDoc, TripleDoc};
use ncgeom::morphisms::{classify, default_states, SmoothMorphism};
use ncgeom::operator_core::c64;
use ncgeom::states_metric::{connes_distance, DistanceOptions, PureState, State};
use ncgeom::triples::{build_npoint_uniform, FiniteSpectralTriple};
use ncgeom::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcgeomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Shape = 4,
    Validation = 5,
    Precondition = 6,
    IterationLimit = 7,
    Numerical = 8,
    Inconsistent = 9,
    Io = 10,
    Panic = 11,
}

/// Finite spectral triple.
pub struct NcgeomTriple(FiniteSpectralTriple);

/// Smooth morphism between two finite spectral triples.
pub struct NcgeomMorphism(SmoothMorphism);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcgeomStatus {
    match e {
        Error::Shape(_) => NcgeomStatus::Shape,
        Error::NotHermitian(_) | Error::Validation(_) => NcgeomStatus::Validation,
        Error::Precondition(_) | Error::NotHomomorphism(_) | Error::NotSurjective { .. } => {
            NcgeomStatus::Precondition
        }
        Error::IterationLimit { .. } => NcgeomStatus::IterationLimit,
        Error::Numerical(_) => NcgeomStatus::Numerical,
        Error::Inconsistent(_) => NcgeomStatus::Inconsistent,
        Error::Io(_) => NcgeomStatus::Io,
        Error::Input(_) | Error::Grid(_) | Error::Json(_) => NcgeomStatus::InvalidInput,
    }
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), (NcgeomStatus, String)>) -> NcgeomStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NcgeomStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            NcgeomStatus::Panic
        }
    }
}

fn lib<T>(r: ncgeom::Result<T>) -> Result<T, (NcgeomStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NcgeomStatus, String) {
    (NcgeomStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NcgeomStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (NcgeomStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, (NcgeomStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|e| (NcgeomStatus::InvalidInput, e.to_string()))
}

/// Library version as a static nul-terminated string. Do not free it.
#[no_mangle]
pub extern "C" fn ncgeom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. The caller owns the returned string.
#[no_mangle]
pub extern "C" fn ncgeom_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(std::ptr::null_mut(), CString::into_raw))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Uniform N-point space with off-diagonal coupling `x_re + i x_im`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_npoint(
    n: usize,
    x_re: f64,
    x_im: f64,
    out: *mut *mut NcgeomTriple,
) -> NcgeomStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = lib(build_npoint_uniform(n, c64(x_re, x_im)))?;
        *out = Box::into_raw(Box::new(NcgeomTriple(t)));
        Ok(())
    })
}

/// Parses and validates a triple in the CLI's JSON format.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_from_json(json: *const c_char, out: *mut *mut NcgeomTriple) -> NcgeomStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let doc: TripleDoc = lib(serde_json::from_str(text).map_err(Error::from))?;
        let t = lib(doc.to_triple())?;
        *out = Box::into_raw(Box::new(NcgeomTriple(t)));
        Ok(())
    })
}

/// Serializes a triple to JSON. The caller frees `*out` with [`ncgeom_string_free`].
///
/// # Safety
/// `t` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_to_json(t: *const NcgeomTriple, out: *mut *mut c_char) -> NcgeomStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("triple"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(lib(io::write_triple(&t.0))?)?;
        Ok(())
    })
}

/// Hilbert space dimension, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_hilbert_dim(t: *const NcgeomTriple) -> usize {
    t.as_ref().map_or(0, |t| t.0.hilbert_dim())
}

/// Number of matrix blocks of the algebra, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_num_blocks(t: *const NcgeomTriple) -> usize {
    t.as_ref().map_or(0, |t| t.0.algebra().num_blocks())
}

/// Releases a triple.
///
/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_triple_free(t: *mut NcgeomTriple) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Distance between the evaluation states of two blocks; `eps <= 0` selects the
/// default gap tolerance. An infinite distance is reported as `INFINITY`.
///
/// # Safety
/// `t` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_distance_blocks(
    t: *const NcgeomTriple,
    rho_block: usize,
    sigma_block: usize,
    eps: f64,
    out: *mut f64,
) -> NcgeomStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("triple"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = DistanceOptions::default();
        if eps > 0.0 {
            opts.eps = eps;
        }
        let rho = State::Pure(PureState::evaluation(rho_block));
        let sigma = State::Pure(PureState::evaluation(sigma_block));
        *out = lib(connes_distance(&t.0, &rho, &sigma, &opts))?.value.as_f64();
        Ok(())
    })
}

/// Same as [`ncgeom_distance_blocks`] but returns the full result (value,
/// certificate, iterations, upper bound) as JSON.
///
/// # Safety
/// `t` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_distance_json(
    t: *const NcgeomTriple,
    rho_block: usize,
    sigma_block: usize,
    eps: f64,
    out: *mut *mut c_char,
) -> NcgeomStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("triple"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = DistanceOptions::default();
        if eps > 0.0 {
            opts.eps = eps;
        }
        let rho = State::Pure(PureState::evaluation(rho_block));
        let sigma = State::Pure(PureState::evaluation(sigma_block));
        let r = lib(connes_distance(&t.0, &rho, &sigma, &opts))?;
        *out = into_c_string(lib(io::to_json_string(&DistanceDoc::from(&r)))?)?;
        Ok(())
    })
}

/// Parses a morphism in the CLI's JSON format. Triples given by path are
/// resolved against `base_dir`, or the working directory when it is null.
///
/// # Safety
/// `json` must be a nul-terminated string, `base_dir` null or nul-terminated, and
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_morphism_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut NcgeomMorphism,
) -> NcgeomStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let base = if base_dir.is_null() { "." } else { read_str(base_dir, "base_dir")? };
        if out.is_null() {
            return Err(null("out"));
        }
        let doc: MorphismDoc = lib(serde_json::from_str(text).map_err(Error::from))?;
        let m = lib(doc.to_morphism(Path::new(base)))?;
        *out = Box::into_raw(Box::new(NcgeomMorphism(m)));
        Ok(())
    })
}

/// Releases a morphism.
///
/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_morphism_free(m: *mut NcgeomMorphism) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Classification report as JSON over the standard states of the target.
/// Returns `Inconsistent` (with no report) if the implications fail.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ncgeom_classify_json(
    m: *const NcgeomMorphism,
    tol: f64,
    eps: f64,
    out: *mut *mut c_char,
) -> NcgeomStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("morphism"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let states = default_states(m.0.target().algebra());
        let report = lib(classify(&m.0, Some(&states), tol, eps, &DistanceOptions::default()))?;
        *out = into_c_string(lib(io::to_json_string(&report))?)?;
        Ok(())
    })
}
