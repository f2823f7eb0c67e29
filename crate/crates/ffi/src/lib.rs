//! C ABI over `glu-core`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every call returns a [`GluStatus`]; on failure a description is available
//! from [`glu_last_error_message`] on the same thread. Matrices cross the
//! boundary as column-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use glu_core::bounds::gamma_metrics;
use glu_core::factor::{factorize, Algorithm, GluFactorization as CoreFactorization};
use glu_core::growth::growth_factors;
use glu_core::harness::{gen_matrix, io, Spectrum, SpectrumProfile};
use glu_core::linalg::{self, Matrix};
use glu_core::sketch::{SketchDims, SketchKind};
use glu_core::Error;

/// Opaque dense matrix.
pub struct GluMatrix(Matrix);

/// Opaque factorization `A_k = T * core * S`.
pub struct GluFactorization(CoreFactorization);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GluStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    RankDeficient = 4,
    NonFinite = 5,
    Convergence = 6,
    TinyPivot = 7,
    Io = 8,
    Parse = 9,
    Panic = 99,
}

/// Values accepted by the `algo` argument of [`glu_factorize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GluAlgorithm {
    Glu = 0,
    Rlu = 1,
    Rqr = 2,
    PrrRlu = 3,
    Cw = 4,
}

/// Values accepted by the sketch-kind arguments of [`glu_factorize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GluSketchKind {
    Srht = 0,
    Gaussian = 1,
    Haar = 2,
    RowSelection = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GluDims {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub lp: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(GluStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension { .. } | Error::NotPowerOfTwo(_) => GluStatus::Dimension,
            Error::NonFinite { .. } => GluStatus::NonFinite,
            Error::RankDeficient { .. } => GluStatus::RankDeficient,
            Error::Convergence { .. } => GluStatus::Convergence,
            Error::TinyPivot { .. } => GluStatus::TinyPivot,
            Error::Io(_) => GluStatus::Io,
            Error::Parse(_) => GluStatus::Parse,
            _ => GluStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: GluStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GluStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GluStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            GluStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes a handle from this library or null
    unsafe { p.as_ref() }.ok_or_else(|| Failure(GluStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        fail(GluStatus::NullPointer, format!("{what} is null"))
    } else {
        Ok(p)
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(GluStatus::NullPointer, format!("{what} is null"));
    }
    // SAFETY: non-null, caller guarantees NUL termination
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(GluStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn put_matrix(out: *mut *mut GluMatrix, m: Matrix) {
    // SAFETY: `out` was checked non-null
    unsafe { *out = Box::into_raw(Box::new(GluMatrix(m))) };
}

fn algorithm(code: u32) -> Result<Algorithm, Failure> {
    Ok(match code {
        0 => Algorithm::Glu,
        1 => Algorithm::Rlu,
        2 => Algorithm::Rqr,
        3 => Algorithm::PrrRlu,
        4 => Algorithm::Cw,
        _ => return fail(GluStatus::InvalidArgument, format!("unknown algorithm {code}")),
    })
}

fn sketch_kind(code: u32) -> Result<SketchKind, Failure> {
    Ok(match code {
        0 => SketchKind::Srht,
        1 => SketchKind::Gaussian,
        2 => SketchKind::Haar,
        3 => SketchKind::RowSelection,
        _ => return fail(GluStatus::InvalidArgument, format!("unknown sketch kind {code}")),
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn glu_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn glu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows * cols` column-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles (it may be null when that
/// product is zero) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut GluMatrix,
) -> GluStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(GluStatus::Dimension, "rows * cols overflows".into()))?;
        let values = if len == 0 {
            Vec::new()
        } else {
            if data.is_null() {
                return fail(GluStatus::NullPointer, "data is null");
            }
            // SAFETY: caller guarantees `len` readable doubles
            unsafe { std::slice::from_raw_parts(data, len) }.to_vec()
        };
        put_matrix(out, linalg::from_col_major(rows, cols, values)?);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_rows(m: *const GluMatrix) -> usize {
    // SAFETY: forwarded caller contract
    unsafe { m.as_ref() }.map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_cols(m: *const GluMatrix) -> usize {
    // SAFETY: forwarded caller contract
    unsafe { m.as_ref() }.map_or(0, |m| m.0.ncols())
}

/// Writes the entries column-major into `out`, which holds `len` doubles;
/// `len` must equal rows * cols.
///
/// # Safety
/// `m` must be a live handle and `out` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_copy_data(m: *const GluMatrix, out: *mut f64, len: usize) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let m = unsafe { get(m, "matrix") }?;
        let want = m.0.len();
        if len != want {
            return fail(GluStatus::Dimension, format!("buffer holds {len} values, matrix has {want}"));
        }
        if want > 0 {
            let out = out_ptr(out, "out")?;
            // SAFETY: caller guarantees `len` writable doubles
            unsafe { std::slice::from_raw_parts_mut(out, len) }.copy_from_slice(m.0.as_slice());
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_free(m: *mut GluMatrix) {
    if !m.is_null() {
        // SAFETY: handle came from Box::into_raw in this library
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Reads a `.mtx` (Matrix Market array) or `.glum`/`.bin` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_read(path: *const c_char, out: *mut *mut GluMatrix) -> GluStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        // SAFETY: forwarded caller contract
        let path = unsafe { c_str(path, "path") }?;
        put_matrix(out, io::read_matrix(Path::new(path))?);
        Ok(())
    })
}

/// Writes a matrix; the format follows the file extension.
///
/// # Safety
/// `m` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn glu_matrix_write(m: *const GluMatrix, path: *const c_char) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let m = unsafe { get(m, "matrix") }?;
        // SAFETY: forwarded caller contract
        let path = unsafe { c_str(path, "path") }?;
        io::write_matrix(Path::new(path), &m.0)?;
        Ok(())
    })
}

/// `U diag(sigma) V^T` with Haar factors and a spectrum given as
/// `exp:RATE`, `poly:POWER`, `step:K:GAP` or `noisy:K:NOISE`.
///
/// # Safety
/// `spectrum` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_gen_matrix(
    spectrum: *const c_char,
    m: usize,
    n: usize,
    seed: u64,
    out: *mut *mut GluMatrix,
) -> GluStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        // SAFETY: forwarded caller contract
        let spectrum: Spectrum = unsafe { c_str(spectrum, "spectrum") }?.parse()?;
        put_matrix(out, gen_matrix(&SpectrumProfile { spectrum, m, n, seed })?);
        Ok(())
    })
}

/// Runs `algo` (a [`GluAlgorithm`] value) with target rank `k` and sketch
/// sizes `l`, `lp`; `lp` is ignored by RLU, RQR and PRR_RLU. `left` and
/// `right` are [`GluSketchKind`] values.
///
/// # Safety
/// `a` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_factorize(
    a: *const GluMatrix,
    algo: u32,
    k: usize,
    l: usize,
    lp: usize,
    left: u32,
    right: u32,
    seed: u64,
    out: *mut *mut GluFactorization,
) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let a = unsafe { get(a, "matrix") }?;
        let out = out_ptr(out, "out")?;
        let algo = algorithm(algo)?;
        let lp = if matches!(algo, Algorithm::Glu | Algorithm::Cw) { lp } else { l };
        let dims = SketchDims::new(k, l, lp)?;
        let f = factorize(&a.0, algo, &dims, sketch_kind(left)?, sketch_kind(right)?, seed)?;
        // SAFETY: `out` checked non-null
        unsafe { *out = Box::into_raw(Box::new(GluFactorization(f))) };
        Ok(())
    })
}

/// # Safety
/// `f` must be a live factorization handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_dims(f: *const GluFactorization, out: *mut GluDims) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let f = unsafe { get(f, "factorization") }?;
        let out = out_ptr(out, "out")?;
        let d = f.0.dims();
        // SAFETY: checked non-null
        unsafe {
            *out = GluDims {
                m: d.m,
                n: d.n,
                k: d.k,
                l: d.l,
                lp: d.lp,
            }
        };
        Ok(())
    })
}

/// Dense `A_k` as a new matrix.
///
/// # Safety
/// `f` must be a live factorization handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_reconstruct(
    f: *const GluFactorization,
    out: *mut *mut GluMatrix,
) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let f = unsafe { get(f, "factorization") }?;
        let out = out_ptr(out, "out")?;
        put_matrix(out, f.0.reconstruct());
        Ok(())
    })
}

/// Copy of the left factor `T`.
///
/// # Safety
/// `f` must be a live factorization handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_t(f: *const GluFactorization, out: *mut *mut GluMatrix) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let f = unsafe { get(f, "factorization") }?;
        let out = out_ptr(out, "out")?;
        put_matrix(out, f.0.t().clone());
        Ok(())
    })
}

/// Copy of the right factor `S`.
///
/// # Safety
/// `f` must be a live factorization handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_s(f: *const GluFactorization, out: *mut *mut GluMatrix) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let f = unsafe { get(f, "factorization") }?;
        let out = out_ptr(out, "out")?;
        put_matrix(out, f.0.s().clone());
        Ok(())
    })
}

/// `y = A_k x` with `x` of length n and `y` of length m.
///
/// # Safety
/// `x` must hold `x_len` doubles and `y` must be writable for `y_len`.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_apply(
    f: *const GluFactorization,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let f = unsafe { get(f, "factorization") }?;
        let d = f.0.dims();
        if x_len != d.n || y_len != d.m {
            return fail(
                GluStatus::Dimension,
                format!("need x of length {} and y of length {}, got {x_len} and {y_len}", d.n, d.m),
            );
        }
        if x.is_null() || y.is_null() {
            return fail(GluStatus::NullPointer, "x or y is null");
        }
        // SAFETY: lengths checked against the caller's stated buffer sizes
        let xs = unsafe { std::slice::from_raw_parts(x, x_len) };
        let res = f.0.apply(xs)?;
        // SAFETY: as above
        unsafe { std::slice::from_raw_parts_mut(y, y_len) }.copy_from_slice(&res);
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glu_factorization_free(f: *mut GluFactorization) {
    if !f.is_null() {
        // SAFETY: handle came from Box::into_raw in this library
        drop(unsafe { Box::from_raw(f) });
    }
}

/// `||A - A_k||_2 / sigma_{k+1}(A)`. Writes NaN when `sigma_{k+1}(A)` is
/// numerically zero (exact recovery).
///
/// # Safety
/// `a`, `ak` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_gamma_lowrank(
    a: *const GluMatrix,
    ak: *const GluMatrix,
    k: usize,
    out: *mut f64,
) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let (a, ak) = unsafe { (get(a, "a")?, get(ak, "ak")?) };
        let out = out_ptr(out, "out")?;
        let g = gamma_metrics(&a.0, &ak.0, k)?;
        // SAFETY: checked non-null
        unsafe { *out = g.gamma_lowrank.unwrap_or(f64::NAN) };
        Ok(())
    })
}

/// Growth factors of elimination without pivoting on a square matrix.
///
/// # Safety
/// `a` must be a live handle; `rho_u`, `rho_l` writable.
#[no_mangle]
pub unsafe extern "C" fn glu_growth_factors(a: *const GluMatrix, rho_u: *mut f64, rho_l: *mut f64) -> GluStatus {
    guard(|| {
        // SAFETY: forwarded caller contract
        let a = unsafe { get(a, "matrix") }?;
        let (pu, pl) = (out_ptr(rho_u, "rho_u")?, out_ptr(rho_l, "rho_l")?);
        if a.0.nrows() != a.0.ncols() {
            return fail(GluStatus::Dimension, format!("growth factors need a square matrix, got {:?}", a.0.shape()));
        }
        let g = growth_factors(&a.0)?;
        // SAFETY: checked non-null
        unsafe {
            *pu = g.rho_u;
            *pl = g.rho_l;
        }
        Ok(())
    })
}
