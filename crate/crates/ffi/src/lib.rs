//! C ABI over `gtensor`.
//!
//! Objects are opaque handles created by `gt_*` constructors and released by
//! the matching `*_free`. Every function returns a [`GtStatus`]; on failure
//! `gt_last_error` describes the most recent error on the calling thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with `gt_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gtensor::correspond::{estimate_tensor_with_min, CorrespondenceSet, DEFAULT_ESTIMATION_TOL};
use gtensor::reconstruct::{
    pgl_equivalent, reconstruct_from_tensor, tensor_map_jacobian_rank, DEFAULT_JACOBIAN_STEP,
};
use gtensor::scene::{random_config, CameraConfig};
use gtensor::tensor::{
    compute_tensor, incidence_oracle, incidence_value, CodimSubspaceTuple, GrassmannTensor, Profile,
};
use gtensor::twist::dual_config;
use gtensor::Error;

/// Result code of every `gt_*` call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input, including invalid UTF-8 or JSON.
    InvalidInput = 2,
    /// A contract on the arguments was violated.
    Precondition = 3,
    /// A rank or general-position condition failed numerically.
    Degenerate = 4,
    /// The solution is not unique.
    Ambiguous = 5,
    /// No reconstruction candidate converged.
    NoConvergence = 6,
    /// Other numerical failure.
    Numerical = 7,
    /// The caller's buffer is too small; the required size was reported.
    BufferTooSmall = 8,
    /// A panic was caught at the boundary.
    Internal = 9,
}

/// Camera configuration handle.
pub struct GtConfig(CameraConfig);

/// Grassmann tensor handle.
pub struct GtTensor(GrassmannTensor);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Input(_) | Error::IndexOutOfRange(_) | Error::Json(_) | Error::Io(_) => {
                GtStatus::InvalidInput
            }
            Error::Precondition(_) => GtStatus::Precondition,
            Error::Degenerate(_) => GtStatus::Degenerate,
            Error::Ambiguous { .. } => GtStatus::Ambiguous,
            Error::NoConvergence { .. } => GtStatus::NoConvergence,
            Error::Indeterminate { .. } | Error::BaseLocus | Error::Generation { .. } => {
                GtStatus::Numerical
            }
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(GtStatus::InvalidInput, format!("json error: {e}"))
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            GtStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {msg}"));
            GtStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(GtStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn read_slice<'a>(p: *const usize, len: usize, what: &str) -> Result<&'a [usize], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(GtStatus::Internal, "string contains a NUL byte".into()))
}

unsafe fn write_f64s(values: &[f64], buf: *mut f64, cap: usize) -> Result<(), Failure> {
    if buf.is_null() || cap < values.len() {
        return Err(Failure(
            GtStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next `gt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a `gt_*` out-parameter and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Random generic configuration of `r` cameras `P^n -> P^{m_i}`.
///
/// # Safety
/// `m` must point to `r` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_config_random(
    n: usize,
    m: *const usize,
    r: usize,
    seed: u64,
    out: *mut *mut GtConfig,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = read_slice(m, r, "m")?;
        let cfg = random_config(n, m, seed)?;
        *out = Box::into_raw(Box::new(GtConfig(cfg)));
        Ok(())
    })
}

/// Parse a configuration from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_config_from_json(
    json: *const c_char,
    out: *mut *mut GtConfig,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg: CameraConfig = serde_json::from_str(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(GtConfig(cfg)));
        Ok(())
    })
}

/// JSON form of a configuration; free with `gt_string_free`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_config_to_json(
    cfg: *const GtConfig,
    out: *mut *mut c_char,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = deref(cfg, "cfg")?;
        *out = into_c_string(serde_json::to_string(&cfg.0)?)?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gt_config_free(cfg: *mut GtConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Stacked camera matrix, row-major. `rows` and `cols` are always set; the
/// data is copied only when `cap >= rows * cols`.
///
/// # Safety
/// `cfg` must be live; `buf` must hold `cap` values; `rows`, `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_config_stacked(
    cfg: *const GtConfig,
    buf: *mut f64,
    cap: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> GtStatus {
    guard(|| {
        let cfg = deref(cfg, "cfg")?;
        let (rows, cols) = (out_ptr(rows, "rows")?, out_ptr(cols, "cols")?);
        let s = cfg.0.stacked();
        *rows = s.nrows();
        *cols = s.ncols();
        let row_major: Vec<f64> = s.transpose().iter().copied().collect();
        write_f64s(&row_major, buf, cap)
    })
}

unsafe fn profile_for(
    cfg: &CameraConfig,
    alpha: *const usize,
    len: usize,
) -> Result<Profile, Failure> {
    let alpha = read_slice(alpha, len, "alpha")?;
    Ok(Profile::new(cfg.n(), cfg.m(), alpha.to_vec())?)
}

/// Tensor of `cfg` for the profile `alpha` (one entry per camera).
///
/// # Safety
/// `cfg` must be live, `alpha` must point to `alpha_len` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_compute(
    cfg: *const GtConfig,
    alpha: *const usize,
    alpha_len: usize,
    out: *mut *mut GtTensor,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = deref(cfg, "cfg")?;
        let p = profile_for(&cfg.0, alpha, alpha_len)?;
        *out = Box::into_raw(Box::new(GtTensor(compute_tensor(&cfg.0, &p)?)));
        Ok(())
    })
}

/// Number of entries; zero for a null handle.
///
/// # Safety
/// `t` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_len(t: *const GtTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copy the canonical entries into `buf`.
///
/// # Safety
/// `t` must be live and `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_entries(
    t: *const GtTensor,
    buf: *mut f64,
    cap: usize,
) -> GtStatus {
    guard(|| write_f64s(deref(t, "t")?.0.entries(), buf, cap))
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_from_json(
    json: *const c_char,
    out: *mut *mut GtTensor,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t: GrassmannTensor = serde_json::from_str(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(GtTensor(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_to_json(t: *const GtTensor, out: *mut *mut c_char) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = into_c_string(serde_json::to_string(&deref(t, "t")?.0)?)?;
        Ok(())
    })
}

/// Projective distance between two tensors of the same profile.
///
/// # Safety
/// `a`, `b` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_distance(
    a: *const GtTensor,
    b: *const GtTensor,
    out: *mut f64,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = deref(a, "a")?.0.distance(&deref(b, "b")?.0)?;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gt_tensor_free(t: *mut GtTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Contraction of `t` against a subspace tuple given as `{"forms": ...}`.
///
/// # Safety
/// `t` must be live, `tuple_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_incidence_value(
    t: *const GtTensor,
    tuple_json: *const c_char,
    out: *mut f64,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let u: CodimSubspaceTuple = serde_json::from_str(read_str(tuple_json, "tuple_json")?)?;
        *out = incidence_value(&deref(t, "t")?.0, &u)?;
        Ok(())
    })
}

/// Determinant of the stacked form-camera products for a subspace tuple.
///
/// # Safety
/// `cfg` must be live, `tuple_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_incidence_oracle(
    cfg: *const GtConfig,
    tuple_json: *const c_char,
    out: *mut f64,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let u: CodimSubspaceTuple = serde_json::from_str(read_str(tuple_json, "tuple_json")?)?;
        *out = incidence_oracle(&deref(cfg, "cfg")?.0, &u)?;
        Ok(())
    })
}

/// Tensor from a correspondence file's JSON. `min_count == 0` requires the
/// default of `D - 1` tuples.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_estimate(
    json: *const c_char,
    min_count: usize,
    out: *mut *mut GtTensor,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cs: CorrespondenceSet = serde_json::from_str(read_str(json, "json")?)?;
        let min = if min_count == 0 {
            cs.profile().size().saturating_sub(1)
        } else {
            min_count
        };
        let (t, _) = estimate_tensor_with_min(&cs, DEFAULT_ESTIMATION_TOL, min)?;
        *out = Box::into_raw(Box::new(GtTensor(t)));
        Ok(())
    })
}

/// Reconstruction orbits as a JSON array, best first.
///
/// # Safety
/// `t` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_reconstruct(
    t: *const GtTensor,
    restarts: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let orbits = reconstruct_from_tensor(&deref(t, "t")?.0, restarts, seed)?;
        *out = into_c_string(serde_json::to_string(&orbits)?)?;
        Ok(())
    })
}

/// Sets `*out` to 1 when the configurations differ by a homography and
/// per-camera scales, else 0.
///
/// # Safety
/// `a`, `b` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_pgl_equivalent(
    a: *const GtConfig,
    b: *const GtConfig,
    tol: f64,
    out: *mut i32,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = pgl_equivalent(&deref(a, "a")?.0, &deref(b, "b")?.0, tol)?.is_some() as i32;
        Ok(())
    })
}

/// Dual of a line-camera configuration. With `identified != 0` the dual's
/// images are carried back to the original image lines.
///
/// # Safety
/// `cfg` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_dual_config(
    cfg: *const GtConfig,
    identified: i32,
    out: *mut *mut GtConfig,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let dual = dual_config(&deref(cfg, "cfg")?.0)?;
        let result = if identified != 0 {
            dual.identified()?
        } else {
            dual.into_config()
        };
        *out = Box::into_raw(Box::new(GtConfig(result)));
        Ok(())
    })
}

/// Numerical rank of the Jacobian of the tensor map at `cfg`.
///
/// # Safety
/// `cfg` must be live, `alpha` must point to `alpha_len` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gt_jacobian_rank(
    cfg: *const GtConfig,
    alpha: *const usize,
    alpha_len: usize,
    out: *mut usize,
) -> GtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = deref(cfg, "cfg")?;
        let p = profile_for(&cfg.0, alpha, alpha_len)?;
        *out = tensor_map_jacobian_rank(&cfg.0, &p, DEFAULT_JACOBIAN_STEP)?;
        Ok(())
    })
}
