//! C ABI for `scma-core`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns an [`ScmaStatus`]; on failure a message is
//! kept per thread and read with [`scma_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use scma_core::bounds::{
    abs_error_bound, abs_error_bound_complex, rel_error_bound, rel_error_bound_complex, BoundInputs,
};
use scma_core::channel::{transmit, trial_rng, NoiseModel, ReceivedSignal};
use scma_core::codebook::{generate_grid_codebook, generate_separable_codebook, Codebook};
use scma_core::detector::{Detector, DetectorKind};
use scma_core::dmpa::DmpaMode;
use scma_core::error::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScmaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Dimension = 4,
    NotSeparable = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScmaDetectorKind {
    Mpa = 0,
    Llr = 1,
    SplitMpa = 2,
    SplitLlr = 3,
    /// Discretized; split 1-D when the codebook allows it, else 2-D.
    Dmpa = 4,
    Dmpa1d = 5,
    Dmpa2d = 6,
}

impl From<ScmaDetectorKind> for DetectorKind {
    fn from(k: ScmaDetectorKind) -> Self {
        match k {
            ScmaDetectorKind::Mpa => DetectorKind::Mpa,
            ScmaDetectorKind::Llr => DetectorKind::Llr,
            ScmaDetectorKind::SplitMpa => DetectorKind::SplitMpa,
            ScmaDetectorKind::SplitLlr => DetectorKind::SplitLlr,
            ScmaDetectorKind::Dmpa => DetectorKind::Dmpa(DmpaMode::Auto),
            ScmaDetectorKind::Dmpa1d => DetectorKind::Dmpa(DmpaMode::Split1d),
            ScmaDetectorKind::Dmpa2d => DetectorKind::Dmpa(DmpaMode::Complex2d),
        }
    }
}

/// Noise model of a bound computation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScmaField {
    /// `noise_var` is the real variance sigma^2.
    Real = 0,
    /// `noise_var` is the complex variance N0.
    Complex = 1,
}

/// Opaque codebook handle.
pub struct ScmaCodebook(Codebook);

/// Opaque detector handle; holds its own copy of the codebook.
pub struct ScmaDetector {
    detector: Detector,
    layers: usize,
    resources: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ScmaStatus {
    match e {
        Error::Parse { .. } => ScmaStatus::Parse,
        Error::Dimension(_) | Error::InconsistentSupport { .. } | Error::IrregularGraph { .. } => ScmaStatus::Dimension,
        Error::NotSeparable { .. } => ScmaStatus::NotSeparable,
        Error::Io(_) => ScmaStatus::Io,
        _ => ScmaStatus::InvalidArgument,
    }
}

struct Fail(ScmaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ScmaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ScmaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScmaStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ScmaStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ScmaStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scma_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn scma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Random separable codebook on the regular pair graph over `resources`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_generate(
    resources: usize,
    codewords: usize,
    seed: u64,
    out: *mut *mut ScmaCodebook,
) -> ScmaStatus {
    guard(|| {
        put(
            out,
            ScmaCodebook(generate_separable_codebook(resources, codewords, seed)?),
        )
    })
}

/// Separable codebook whose components are multiples of `w` within `amplitude`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_generate_grid(
    resources: usize,
    codewords: usize,
    w: f64,
    amplitude: f64,
    seed: u64,
    out: *mut *mut ScmaCodebook,
) -> ScmaStatus {
    guard(|| {
        put(
            out,
            ScmaCodebook(generate_grid_codebook(resources, codewords, w, amplitude, seed)?),
        )
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` as in [`scma_codebook_generate`].
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_load(path: *const c_char, out: *mut *mut ScmaCodebook) -> ScmaStatus {
    guard(|| {
        let p = path_arg(path)?;
        put(out, ScmaCodebook(Codebook::load(p)?))
    })
}

/// # Safety
/// `cb` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_save(cb: *const ScmaCodebook, path: *const c_char) -> ScmaStatus {
    guard(|| {
        let cb = cb.as_ref().ok_or_else(|| null("codebook"))?;
        cb.0.save(path_arg(path)?)?;
        Ok(())
    })
}

/// Writes K, J and M. Any output pointer may be null.
///
/// # Safety
/// `cb` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_dims(
    cb: *const ScmaCodebook,
    resources: *mut usize,
    layers: *mut usize,
    codewords: *mut usize,
) -> ScmaStatus {
    guard(|| {
        let cb = &cb.as_ref().ok_or_else(|| null("codebook"))?.0;
        for (p, v) in [
            (resources, cb.resources()),
            (layers, cb.layers()),
            (codewords, cb.codewords()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `cb` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scma_codebook_free(cb: *mut ScmaCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// Superposes codeword `indices[j]` of every layer and adds noise drawn
/// from trial `trial` of the `seed` stream. Writes K samples.
///
/// # Safety
/// `indices` must hold `layers` values; `y_re` and `y_im` must hold `len`.
#[no_mangle]
pub unsafe extern "C" fn scma_transmit(
    cb: *const ScmaCodebook,
    indices: *const usize,
    layers: usize,
    n0: f64,
    seed: u64,
    trial: u64,
    y_re: *mut f64,
    y_im: *mut f64,
    len: usize,
) -> ScmaStatus {
    guard(|| {
        let cb = &cb.as_ref().ok_or_else(|| null("codebook"))?.0;
        if indices.is_null() || y_re.is_null() || y_im.is_null() {
            return Err(null("buffer"));
        }
        if len < cb.resources() {
            return Err(Fail(
                ScmaStatus::BufferTooSmall,
                format!("need {} samples, got {len}", cb.resources()),
            ));
        }
        let idx = std::slice::from_raw_parts(indices, layers);
        let noise = NoiseModel::with_n0(n0)?;
        let y = transmit(idx, cb, &noise, &mut trial_rng(seed, trial))?;
        for (k, c) in y.0.iter().enumerate() {
            *y_re.add(k) = c.re;
            *y_im.add(k) = c.im;
        }
        Ok(())
    })
}

/// Builds a reusable detector. `w` is ignored by non-discretized kinds.
///
/// # Safety
/// `cb` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scma_detector_new(
    cb: *const ScmaCodebook,
    kind: ScmaDetectorKind,
    n0: f64,
    nwid: f64,
    iterations: usize,
    w: f64,
    out: *mut *mut ScmaDetector,
) -> ScmaStatus {
    guard(|| {
        let cb = &cb.as_ref().ok_or_else(|| null("codebook"))?.0;
        let noise = NoiseModel::new(n0, nwid)?;
        let detector = Detector::new(kind.into(), cb, &noise, iterations, w)?;
        put(
            out,
            ScmaDetector {
                detector,
                layers: cb.layers(),
                resources: cb.resources(),
            },
        )
    })
}

/// Detects one received vector of K samples and writes J decided indices.
///
/// # Safety
/// `y_re`/`y_im` must hold `len` values and `decided` `decided_len` slots.
#[no_mangle]
pub unsafe extern "C" fn scma_detector_detect(
    det: *mut ScmaDetector,
    y_re: *const f64,
    y_im: *const f64,
    len: usize,
    decided: *mut usize,
    decided_len: usize,
) -> ScmaStatus {
    guard(|| {
        let det = det.as_mut().ok_or_else(|| null("detector"))?;
        if y_re.is_null() || y_im.is_null() || decided.is_null() {
            return Err(null("buffer"));
        }
        if len != det.resources {
            return Err(Fail(
                ScmaStatus::Dimension,
                format!("expected {} samples, got {len}", det.resources),
            ));
        }
        if decided_len < det.layers {
            return Err(Fail(
                ScmaStatus::BufferTooSmall,
                format!("need {} decision slots, got {decided_len}", det.layers),
            ));
        }
        let re = std::slice::from_raw_parts(y_re, len);
        let im = std::slice::from_raw_parts(y_im, len);
        let y = ReceivedSignal(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect());
        let res = det.detector.detect(&y)?;
        std::slice::from_raw_parts_mut(decided, det.layers).copy_from_slice(&res.decided);
        Ok(())
    })
}

/// # Safety
/// `det` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scma_detector_free(det: *mut ScmaDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Per-entry absolute and relative discretization error bounds.
///
/// # Safety
/// `abs_out` and `rel_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scma_error_bounds(
    field: ScmaField,
    degree: usize,
    w: f64,
    nwid: f64,
    noise_var: f64,
    abs_out: *mut f64,
    rel_out: *mut f64,
) -> ScmaStatus {
    guard(|| {
        if abs_out.is_null() || rel_out.is_null() {
            return Err(null("output"));
        }
        let (a, r) = match field {
            ScmaField::Real => {
                let b = BoundInputs::real(degree, w, nwid, noise_var)?;
                (abs_error_bound(&b), rel_error_bound(&b))
            }
            ScmaField::Complex => {
                let b = BoundInputs::complex(degree, w, nwid, noise_var)?;
                (abs_error_bound_complex(&b), rel_error_bound_complex(&b))
            }
        };
        *abs_out = a;
        *rel_out = r;
        Ok(())
    })
}
