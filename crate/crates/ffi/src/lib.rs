//! C ABI over the `kalpha` core.
//!
//! Every fallible function returns a [`KalphaStatus`] and writes results
//! through out-pointers. On failure the message is kept per thread and can be
//! read with [`kalpha_last_error`]. Handles are opaque and must be released
//! with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kalpha::cli::CliError;
use kalpha::measure::{self, EnvelopeError, EnvelopeSpec, KAlphaParams, MeasureError};
use kalpha::paths::{self, EventPath, PathError};
use kalpha::spaces::{self, SpacesError, TestFunction};

/// Result codes. The nonzero values match the exit codes of the CLI where
/// both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KalphaStatus {
    Ok = 0,
    /// A parameter is out of its domain or a descriptor does not parse.
    InvalidArgument = 2,
    Io = 3,
    /// Analytic and numerical results disagree.
    Consistency = 4,
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque measure parameters.
pub struct KalphaParams(KAlphaParams);

/// Opaque large-jump path.
pub struct KalphaPath(EventPath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(KalphaStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Io(_) => KalphaStatus::Io,
            CliError::Consistency(_) => KalphaStatus::Consistency,
            CliError::Usage(_) | CliError::Domain(_) => KalphaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! via_cli {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                CliError::from(e).into()
            }
        }
    )*};
}

via_cli!(MeasureError, EnvelopeError, PathError, SpacesError, std::io::Error);

fn null(what: &str) -> Failure {
    Failure(KalphaStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KalphaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KalphaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic in kalpha".into());
            KalphaStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(KalphaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn params<'a>(p: *const KalphaParams) -> Result<&'a KAlphaParams, Failure> {
    p.as_ref().map(|p| &p.0).ok_or_else(|| null("params"))
}

unsafe fn path<'a>(p: *const KalphaPath) -> Result<&'a EventPath, Failure> {
    p.as_ref().map(|p| &p.0).ok_or_else(|| null("path"))
}

fn invalid(msg: String) -> Failure {
    Failure(KalphaStatus::InvalidArgument, msg)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn kalpha_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kalpha_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out_params` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn kalpha_params_new(alpha: f64, out_params: *mut *mut KalphaParams) -> KalphaStatus {
    guard(|| {
        let slot = out(out_params, "out_params")?;
        *slot = Box::into_raw(Box::new(KalphaParams(KAlphaParams::new(alpha)?)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`kalpha_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kalpha_params_free(params: *mut KalphaParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_params_alpha(params: *const KalphaParams, value: *mut f64) -> KalphaStatus {
    guard(|| {
        *out(value, "value")? = self::params(params)?.alpha();
        Ok(())
    })
}

/// Total mass of the measure outside `[-1, 1]`.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_trunc_mass(params: *const KalphaParams, value: *mut f64) -> KalphaStatus {
    guard(|| {
        *out(value, "value")? = self::params(params)?.trunc_mass();
        Ok(())
    })
}

/// `nu((r, inf))` for `r >= 1`.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_tail_one_sided(params: *const KalphaParams, r: f64, value: *mut f64) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(value, "value")? = measure::tail_one_sided(r, p)?;
        Ok(())
    })
}

/// `ln(1 + |jump|)` at which the normalized survival of a large jump is `u` in `(0, 1]`.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_inverse_tail(params: *const KalphaParams, u: f64, value: *mut f64) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(value, "value")? = measure::inverse_tail(u, p)?;
        Ok(())
    })
}

/// Laplace exponent of the positive-jump subordinator.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_laplace_exponent(
    params: *const KalphaParams,
    lambda: f64,
    value: *mut f64,
) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(value, "value")? = measure::laplace_exponent(lambda, p)?;
        Ok(())
    })
}

/// Pruitt function `h(r)`.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_pruitt_hbar(params: *const KalphaParams, r: f64, value: *mut f64) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(value, "value")? = measure::pruitt_hbar(r, p)?;
        Ok(())
    })
}

/// `int_{1 < |x| <= cap} |x|^eta nu(dx)`.
///
/// # Safety
/// `params` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_trunc_moment(
    params: *const KalphaParams,
    eta: f64,
    cap: f64,
    value: *mut f64,
) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(value, "value")? = measure::trunc_moment(eta, cap, p)?;
        Ok(())
    })
}

/// Upper-function integral for an envelope descriptor such as `exp:c=1`.
/// `convergent` receives 1 or 0; `value` receives the integral, or infinity
/// when it diverges.
///
/// # Safety
/// `params` must be a live handle, `envelope` a NUL-terminated string and
/// both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_upper_function(
    params: *const KalphaParams,
    envelope: *const c_char,
    convergent: *mut i32,
    value: *mut f64,
) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        let f: EnvelopeSpec = str_arg(envelope, "envelope")?.parse()?;
        let o = measure::upper_function_integral(&f, p)?;
        *out(convergent, "convergent")? = i32::from(o.status == measure::Convergence::Convergent);
        *out(value, "value")? = o.value.unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Path support for one `beta > 1`: membership in S', K' and K'_beta as 0/1.
///
/// # Safety
/// `params` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_classify(
    params: *const KalphaParams,
    beta: f64,
    in_s_prime: *mut i32,
    in_k_prime: *mut i32,
    in_k_beta: *mut i32,
) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        let v = measure::classify_support(p, &[beta])?;
        *out(in_s_prime, "in_s_prime")? = i32::from(v.in_s_prime);
        *out(in_k_prime, "in_k_prime")? = i32::from(v.in_k_prime);
        *out(in_k_beta, "in_k_beta")? = i32::from(v.k_beta(beta).unwrap_or(false));
        Ok(())
    })
}

/// Simulates the large-jump component of path `path_index` of `seed`.
///
/// # Safety
/// `params` must be a live handle and `out_path` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_simulate(
    params: *const KalphaParams,
    horizon: f64,
    seed: u64,
    path_index: u64,
    out_path: *mut *mut KalphaPath,
) -> KalphaStatus {
    guard(|| {
        let p = self::params(params)?;
        let slot = out(out_path, "out_path")?;
        let path = paths::simulate_large_indexed(p, horizon, seed, path_index)?;
        *slot = Box::into_raw(Box::new(KalphaPath(path)));
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_free(path: *mut KalphaPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// # Safety
/// `path` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_len(path: *const KalphaPath, len: *mut usize) -> KalphaStatus {
    guard(|| {
        *out(len, "len")? = self::path(path)?.len();
        Ok(())
    })
}

/// # Safety
/// `path` must be a live handle and `horizon` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_horizon(path: *const KalphaPath, horizon: *mut f64) -> KalphaStatus {
    guard(|| {
        *out(horizon, "horizon")? = self::path(path)?.horizon;
        Ok(())
    })
}

/// Event `index`: time, sign (+1 or -1) and `ln(1 + |jump|)`.
///
/// # Safety
/// `path` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_event(
    path: *const KalphaPath,
    index: usize,
    t: *mut f64,
    sign: *mut i8,
    log1p_mag: *mut f64,
) -> KalphaStatus {
    guard(|| {
        let events = self::path(path)?.events();
        let e = events
            .get(index)
            .ok_or_else(|| invalid(format!("event {index} out of range (len {})", events.len())))?;
        *out(t, "t")? = e.t;
        *out(sign, "sign")? = e.sign;
        *out(log1p_mag, "log1p_mag")? = e.log1p_mag;
        Ok(())
    })
}

/// Writes the path as a JSON-Lines file.
///
/// # Safety
/// `path` must be a live handle and `file` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_write(path: *const KalphaPath, file: *const c_char) -> KalphaStatus {
    guard(|| {
        let p = self::path(path)?;
        let f = File::create(str_arg(file, "file")?)?;
        paths::write_jsonl(BufWriter::new(f), std::slice::from_ref(p))?;
        Ok(())
    })
}

/// Reads path `path_index` from a JSON-Lines file.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out_path` writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_path_read(
    file: *const c_char,
    path_index: u64,
    out_path: *mut *mut KalphaPath,
) -> KalphaStatus {
    guard(|| {
        let slot = out(out_path, "out_path")?;
        let f = File::open(str_arg(file, "file")?)?;
        let path = paths::read_jsonl(BufReader::new(f))?
            .into_iter()
            .find(|p| p.path_index == path_index)
            .ok_or_else(|| invalid(format!("no path with index {path_index}")))?;
        *slot = Box::into_raw(Box::new(KalphaPath(path)));
        Ok(())
    })
}

/// White-noise pairing with a test function descriptor such as
/// `bump:center=5,width=2`. The value is returned as sign and natural-log
/// magnitude; `crosscheck_rel_err` compares the two summation orders.
///
/// # Safety
/// `path` must be a live handle, `phi` a NUL-terminated string and the
/// out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn kalpha_pair(
    path: *const KalphaPath,
    phi: *const c_char,
    sign: *mut i8,
    logmag: *mut f64,
    crosscheck_rel_err: *mut f64,
) -> KalphaStatus {
    guard(|| {
        let p = self::path(path)?;
        let phi: TestFunction = str_arg(phi, "phi")?.parse()?;
        let r = spaces::pair_white_noise(p, &phi)?;
        *out(sign, "sign")? = r.value.sign();
        *out(logmag, "logmag")? = r.value.logmag();
        *out(crosscheck_rel_err, "crosscheck_rel_err")? = r.crosscheck_rel_err;
        Ok(())
    })
}
