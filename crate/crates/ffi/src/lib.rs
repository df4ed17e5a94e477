//! C ABI over the `chebotarev` library.
//!
//! Every fallible function returns a `ChbStatus`; on failure the message is
//! available from `chb_last_error_message` on the same thread. Objects are
//! opaque handles released with their `_free` function. Strings returned
//! through `char **` out-parameters are owned by the caller and released
//! with `chb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chebotarev::circle::{representation_counts, summarize, verify_with_counts, CoefficientArray};
use chebotarev::ecapp::{check_certificate, construct_curve, CurveCertificate};
use chebotarev::expsum::best_approx;
use chebotarev::galois::GaloisSpec;
use chebotarev::instance::ProblemInstance;
use chebotarev::phase::Alpha;
use chebotarev::sieve::{smooth_count, PrimeTable};
use chebotarev::singular::LocalFactors;
use chebotarev::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ResourceLimit = 3,
    NotFound = 4,
    Io = 5,
    Panic = 6,
}

fn status_of(e: &Error) -> ChbStatus {
    match e {
        Error::ResourceLimit(_) => ChbStatus::ResourceLimit,
        Error::NotFoundWithinLimit { .. } => ChbStatus::NotFound,
        Error::Io(_) | Error::Cache(_) => ChbStatus::Io,
        _ => ChbStatus::InvalidArgument,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Fail {
    Null(&'static str),
    Lib(Error),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> ChbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChbStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ChbStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            ChbStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ChbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn json_out(v: &impl serde::Serialize, out: &mut *mut c_char) -> Result<(), Fail> {
    let s = serde_json::to_string(v).map_err(|e| Fail::Lib(e.into()))?;
    *out = to_c_string(s);
    Ok(())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn chb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn chb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.as_ptr()).unwrap_or(ptr::null()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn chb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Sieve of all primes up to `limit`.
pub struct ChbPrimeTable(PrimeTable);

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chb_prime_table_new(limit: u64, out: *mut *mut ChbPrimeTable) -> ChbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(ChbPrimeTable(PrimeTable::new(limit)?)));
        Ok(())
    })
}

/// # Safety
/// `t` must be NULL or a handle from `chb_prime_table_new`.
#[no_mangle]
pub unsafe extern "C" fn chb_prime_table_free(t: *mut ChbPrimeTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of primes `≤ x` (x capped at the table limit).
///
/// # Safety
/// `t` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_prime_table_pi(t: *const ChbPrimeTable, x: u64, out: *mut u64) -> ChbStatus {
    guard(|| {
        let t = handle(t, "table")?;
        *out_arg(out, "out")? = t.0.pi(x.min(t.0.limit())) as u64;
        Ok(())
    })
}

/// A validated problem instance.
pub struct ChbInstance(ProblemInstance);

/// Parses an instance JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn chb_instance_from_json(json: *const c_char, out: *mut *mut ChbInstance) -> ChbStatus {
    guard(|| {
        let s = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(ChbInstance(ProblemInstance::from_json(s)?)));
        Ok(())
    })
}

/// Loads a built-in instance such as `classical-vinogradov`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn chb_instance_builtin(name: *const c_char, out: *mut *mut ChbInstance) -> ChbStatus {
    guard(|| {
        let s = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(ChbInstance(ProblemInstance::builtin(s)?)));
        Ok(())
    })
}

/// # Safety
/// `i` must be NULL or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn chb_instance_free(i: *mut ChbInstance) {
    if !i.is_null() {
        drop(Box::from_raw(i));
    }
}

/// Cutoff `X` of an instance.
///
/// # Safety
/// `i` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_instance_x(i: *const ChbInstance, out: *mut u64) -> ChbStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(i, "instance")?.0.x;
        Ok(())
    })
}

/// Representation counts `S(N)` over the attainable range.
pub struct ChbCounts(CoefficientArray);

/// # Safety
/// All pointers must be valid; the table limit must be at least `X`.
#[no_mangle]
pub unsafe extern "C" fn chb_representation_counts(
    t: *const ChbPrimeTable,
    i: *const ChbInstance,
    out: *mut *mut ChbCounts,
) -> ChbStatus {
    guard(|| {
        let t = handle(t, "table")?;
        let i = handle(i, "instance")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(ChbCounts(representation_counts(&t.0, &i.0)?)));
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn chb_counts_free(c: *mut ChbCounts) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Smallest and largest `N` held.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_counts_range(c: *const ChbCounts, n_min: *mut i64, n_max: *mut i64) -> ChbStatus {
    guard(|| {
        let c = handle(c, "counts")?;
        *out_arg(n_min, "n_min")? = c.0.offset;
        *out_arg(n_max, "n_max")? = c.0.n_max();
        Ok(())
    })
}

/// `S(N)` weighted by `∏ log p_i`, and the number of prime tuples. Zero
/// outside the range.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_counts_get(
    c: *const ChbCounts,
    n: i64,
    weighted: *mut f64,
    unweighted: *mut u64,
) -> ChbStatus {
    guard(|| {
        let (w, u) = handle(c, "counts")?.0.get(n);
        *out_arg(weighted, "weighted")? = w;
        *out_arg(unweighted, "unweighted")? = u;
        Ok(())
    })
}

/// Predicted main term at `N` with Euler factors up to `p_max`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_main_term(i: *const ChbInstance, n: i64, p_max: u64, out: *mut f64) -> ChbStatus {
    guard(|| {
        let i = handle(i, "instance")?;
        let out = out_arg(out, "out")?;
        *out = LocalFactors::new(&i.0, p_max)?.report(n).main_term;
        Ok(())
    })
}

/// Full local-factor report at `N` as JSON.
///
/// # Safety
/// All pointers must be valid; free the string with `chb_string_free`.
#[no_mangle]
pub unsafe extern "C" fn chb_local_factors_json(
    i: *const ChbInstance,
    n: i64,
    p_max: u64,
    out: *mut *mut c_char,
) -> ChbStatus {
    guard(|| {
        let i = handle(i, "instance")?;
        let out = out_arg(out, "out")?;
        json_out(&LocalFactors::new(&i.0, p_max)?.report(n), out)
    })
}

/// Comparison rows for the instance's `N` values plus a summary, as JSON
/// `{"rows": [...], "summary": {...}}`.
///
/// # Safety
/// All pointers must be valid; free the string with `chb_string_free`.
#[no_mangle]
pub unsafe extern "C" fn chb_verify_json(
    t: *const ChbPrimeTable,
    i: *const ChbInstance,
    out: *mut *mut c_char,
) -> ChbStatus {
    guard(|| {
        let t = handle(t, "table")?;
        let i = handle(i, "instance")?;
        let out = out_arg(out, "out")?;
        let counts = representation_counts(&t.0, &i.0)?;
        let rows = verify_with_counts(&counts, &i.0, &i.0.n_values, i.0.euler_pmax)?;
        let summary = summarize(&rows);
        json_out(&serde_json::json!({ "rows": rows, "summary": summary }), out)
    })
}

/// Number of squarefree `n ≤ y` whose prime factors are all `≤ z`.
#[no_mangle]
pub extern "C" fn chb_smooth_count(z: f64, y: f64) -> u64 {
    catch_unwind(|| smooth_count(z, y)).unwrap_or(0)
}

/// Best rational approximation `a/q` of `alpha` with `q ≤ qmax`.
///
/// # Safety
/// `a` and `q` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chb_best_approx(alpha: f64, qmax: u64, a: *mut i64, q: *mut u64) -> ChbStatus {
    guard(|| {
        if qmax == 0 {
            return Err(Fail::Arg("qmax must be positive".into()));
        }
        let r = best_approx(Alpha::real(alpha)?, qmax)?;
        *out_arg(a, "a")? = r.a;
        *out_arg(q, "q")? = r.q;
        Ok(())
    })
}

unsafe fn spec_arg(field: *const c_char) -> Result<GaloisSpec, Fail> {
    let s = str_arg(field, "field")?;
    match GaloisSpec::builtin(s) {
        Some(spec) => Ok(spec),
        None => Ok(GaloisSpec::from_json(s)?.validated()?),
    }
}

/// Elliptic-curve certificate as JSON. `field` is a built-in field name or
/// a GaloisSpec JSON document.
///
/// # Safety
/// All pointers must be valid; free the string with `chb_string_free`.
#[no_mangle]
pub unsafe extern "C" fn chb_construct_curve_json(
    field: *const c_char,
    search_limit: u64,
    out: *mut *mut c_char,
) -> ChbStatus {
    guard(|| {
        let spec = spec_arg(field)?;
        let out = out_arg(out, "out")?;
        json_out(&construct_curve(&spec, search_limit)?, out)
    })
}

/// Re-verifies a certificate; `valid` is set to 1 or 0 and `reasons`
/// receives a JSON array of failure reasons.
///
/// # Safety
/// All pointers must be valid; free the string with `chb_string_free`.
#[no_mangle]
pub unsafe extern "C" fn chb_check_certificate_json(
    certificate: *const c_char,
    field: *const c_char,
    valid: *mut i32,
    reasons: *mut *mut c_char,
) -> ChbStatus {
    guard(|| {
        let text = str_arg(certificate, "certificate")?;
        let cert: CurveCertificate =
            serde_json::from_str(text).map_err(|e| Fail::Arg(format!("certificate: {e}")))?;
        let spec = spec_arg(field)?;
        let valid = out_arg(valid, "valid")?;
        let reasons = out_arg(reasons, "reasons")?;
        let check = check_certificate(&cert, &spec);
        *valid = check.valid as i32;
        json_out(&check.reasons, reasons)
    })
}
