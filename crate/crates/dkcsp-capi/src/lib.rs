//! C ABI for the (d,k)-CSP toolkit: opaque formula handles, integer status
//! codes, and flat out-parameters, so other languages can bind the solver
//! and the bound computations.
//!
//! Conventions:
//! - every fallible function returns a `dkcsp_status` code; `DKCSP_OK` is 0;
//! - on failure, a thread-local message with detail is available through
//!   [`dkcsp_last_error_message`] until the next failing call on the same
//!   thread;
//! - handles returned through out-parameters are owned by the caller and
//!   released with [`dkcsp_formula_free`]; strings with [`dkcsp_string_free`];
//! - assignment buffers are caller-allocated with room for `n` values.
//!
//! The matching header is maintained at `include/dkcsp.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use dkcsp::formula::Formula;
use dkcsp::generators::{self, GenSpec};
use dkcsp::{analysis, bounds, solver};

pub const DKCSP_OK: i32 = 0;
pub const DKCSP_ERR_NULL_ARGUMENT: i32 = 1;
pub const DKCSP_ERR_UTF8: i32 = 2;
pub const DKCSP_ERR_IO: i32 = 3;
pub const DKCSP_ERR_PARSE: i32 = 4;
pub const DKCSP_ERR_INVALID_ARGUMENT: i32 = 5;
pub const DKCSP_ERR_TOO_LARGE: i32 = 6;
pub const DKCSP_ERR_PRECONDITION: i32 = 7;

pub const DKCSP_FAMILY_PLANTED: i32 = 0;
pub const DKCSP_FAMILY_PLANTED_UNIQUE: i32 = 1;
pub const DKCSP_FAMILY_DISTINCT_CRITICAL: i32 = 2;
pub const DKCSP_FAMILY_CHAIN: i32 = 3;
pub const DKCSP_FAMILY_UNIFORM: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(code: i32, message: String) -> i32 {
    let message = CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
    code
}

fn set_lib_error(err: dkcsp::Error) -> i32 {
    let code = match err {
        dkcsp::Error::Parse { .. } => DKCSP_ERR_PARSE,
        dkcsp::Error::InvalidArgument(_) => DKCSP_ERR_INVALID_ARGUMENT,
        dkcsp::Error::TooLarge(_) => DKCSP_ERR_TOO_LARGE,
        dkcsp::Error::Precondition(_) => DKCSP_ERR_PRECONDITION,
    };
    set_error(code, err.to_string())
}

fn null_error(name: &str) -> i32 {
    set_error(DKCSP_ERR_NULL_ARGUMENT, format!("{name} must not be null"))
}

/// Opaque formula handle.
#[allow(non_camel_case_types)]
pub struct dkcsp_formula {
    inner: Formula,
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn dkcsp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static name for a status code.
#[no_mangle]
pub extern "C" fn dkcsp_status_name(status: i32) -> *const c_char {
    let name: &'static str = match status {
        DKCSP_OK => "ok\0",
        DKCSP_ERR_NULL_ARGUMENT => "null argument\0",
        DKCSP_ERR_UTF8 => "invalid utf-8\0",
        DKCSP_ERR_IO => "io error\0",
        DKCSP_ERR_PARSE => "parse error\0",
        DKCSP_ERR_INVALID_ARGUMENT => "invalid argument\0",
        DKCSP_ERR_TOO_LARGE => "too large\0",
        DKCSP_ERR_PRECONDITION => "precondition not met\0",
        _ => "unknown status\0",
    };
    name.as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dkcsp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

unsafe fn formula_ref<'a>(handle: *const dkcsp_formula) -> Option<&'a Formula> {
    handle.as_ref().map(|h| &h.inner)
}

fn boxed(formula: Formula) -> *mut dkcsp_formula {
    Box::into_raw(Box::new(dkcsp_formula { inner: formula }))
}

/// Parses instance text into a new formula handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_parse(
    text: *const c_char,
    out: *mut *mut dkcsp_formula,
) -> i32 {
    if text.is_null() {
        return null_error("text");
    }
    if out.is_null() {
        return null_error("out");
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(text) => text,
        Err(_) => return set_error(DKCSP_ERR_UTF8, "instance text is not utf-8".into()),
    };
    match Formula::parse(text) {
        Ok(formula) => {
            *out = boxed(formula);
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Reads and parses an instance file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_read_file(
    path: *const c_char,
    out: *mut *mut dkcsp_formula,
) -> i32 {
    if path.is_null() {
        return null_error("path");
    }
    if out.is_null() {
        return null_error("out");
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(path) => path,
        Err(_) => return set_error(DKCSP_ERR_UTF8, "path is not utf-8".into()),
    };
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => return set_error(DKCSP_ERR_IO, format!("cannot read {path}: {err}")),
    };
    match Formula::parse(&text) {
        Ok(formula) => {
            *out = boxed(formula);
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Generates an instance; `family` is one of the `DKCSP_FAMILY_*` values.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_generate(
    family: i32,
    d: u32,
    k: usize,
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut dkcsp_formula,
) -> i32 {
    if out.is_null() {
        return null_error("out");
    }
    let spec = GenSpec { d, k, n, m, seed };
    let result = match family {
        DKCSP_FAMILY_PLANTED => generators::planted_random(&spec),
        DKCSP_FAMILY_PLANTED_UNIQUE => generators::planted_unique(&spec, 1000),
        DKCSP_FAMILY_DISTINCT_CRITICAL => generators::distinct_critical(&spec),
        DKCSP_FAMILY_CHAIN => generators::constant_x_chain(n),
        DKCSP_FAMILY_UNIFORM => generators::uniform_random(&spec),
        _ => {
            return set_error(
                DKCSP_ERR_INVALID_ARGUMENT,
                format!("unknown family code {family}"),
            )
        }
    };
    match result {
        Ok(formula) => {
            *out = boxed(formula);
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Releases a formula handle. Null is a no-op.
///
/// # Safety
/// `handle` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_free(handle: *mut dkcsp_formula) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_domain_size(handle: *const dkcsp_formula) -> u32 {
    formula_ref(handle).map_or(0, Formula::d)
}

/// # Safety
/// `handle` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_num_vars(handle: *const dkcsp_formula) -> usize {
    formula_ref(handle).map_or(0, Formula::num_vars)
}

/// # Safety
/// `handle` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_num_constraints(handle: *const dkcsp_formula) -> usize {
    formula_ref(handle).map_or(0, Formula::num_constraints)
}

/// Maximum constraint width after duplicate-literal normalization.
///
/// # Safety
/// `handle` must be a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_width(handle: *const dkcsp_formula) -> usize {
    formula_ref(handle).map_or(0, Formula::width)
}

/// Serializes the formula to instance-format text; the caller frees the
/// string with [`dkcsp_string_free`].
///
/// # Safety
/// `handle` must be a live formula handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_formula_to_string(
    handle: *const dkcsp_formula,
    out: *mut *mut c_char,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    if out.is_null() {
        return null_error("out");
    }
    match CString::new(formula.to_instance_string()) {
        Ok(text) => {
            *out = text.into_raw();
            DKCSP_OK
        }
        Err(_) => set_error(DKCSP_ERR_UTF8, "serialized text contains NUL".into()),
    }
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

unsafe fn write_assignment(
    values_out: *mut u32,
    n: usize,
    found: Option<&dkcsp::Assignment>,
) {
    if values_out.is_null() {
        return;
    }
    let out = std::slice::from_raw_parts_mut(values_out, n);
    match found {
        Some(a) => out.copy_from_slice(a.values()),
        None => out.fill(0),
    }
}

/// Repeated randomized ppz trials. `values_out` may be null or point to a
/// buffer of `n` values; it is zero-filled when nothing is found.
///
/// # Safety
/// `handle` must be a live formula handle; `values_out`, when non-null, must
/// have room for `n` values; `found`, `successes`, and `trials_run` may be
/// null when the caller does not need them.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_ppz_solve(
    handle: *const dkcsp_formula,
    trials: u64,
    seed: u64,
    stop_early: bool,
    values_out: *mut u32,
    found: *mut bool,
    successes: *mut u64,
    trials_run: *mut u64,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    if trials < 1 {
        return set_error(DKCSP_ERR_INVALID_ARGUMENT, "need at least one trial".into());
    }
    let report = solver::ppz_solve(formula, trials, seed, stop_early);
    write_assignment(values_out, formula.num_vars(), report.found.as_ref());
    if !found.is_null() {
        *found = report.found.is_some();
    }
    if !successes.is_null() {
        *successes = report.successes;
    }
    if !trials_run.is_null() {
        *trials_run = report.trials_run;
    }
    DKCSP_OK
}

/// Random-walk baseline with restarts; `steps = 0` means the 3n default.
///
/// # Safety
/// Same contract as [`dkcsp_ppz_solve`].
#[no_mangle]
pub unsafe extern "C" fn dkcsp_schoening_solve(
    handle: *const dkcsp_formula,
    restarts: u64,
    steps: u64,
    seed: u64,
    stop_early: bool,
    values_out: *mut u32,
    found: *mut bool,
    successes: *mut u64,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    if restarts < 1 {
        return set_error(DKCSP_ERR_INVALID_ARGUMENT, "need at least one restart".into());
    }
    let steps = if steps == 0 {
        3 * formula.num_vars() as u64
    } else {
        steps
    };
    let report = solver::schoening_solve(formula, restarts, steps, seed, stop_early);
    write_assignment(values_out, formula.num_vars(), report.found.as_ref());
    if !found.is_null() {
        *found = report.found.is_some();
    }
    if !successes.is_null() {
        *successes = report.successes;
    }
    DKCSP_OK
}

/// Exhaustive search for the lexicographically first satisfying assignment.
///
/// # Safety
/// Same buffer contract as [`dkcsp_ppz_solve`].
#[no_mangle]
pub unsafe extern "C" fn dkcsp_brute_solve(
    handle: *const dkcsp_formula,
    values_out: *mut u32,
    found: *mut bool,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    match solver::brute_solve(formula) {
        Ok(result) => {
            write_assignment(values_out, formula.num_vars(), result.as_ref());
            if !found.is_null() {
                *found = result.is_some();
            }
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Exact per-pass success probability by permutation enumeration
/// (small instances only).
///
/// # Safety
/// `handle` must be a live formula handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_exact_success_prob(
    handle: *const dkcsp_formula,
    out: *mut f64,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    if out.is_null() {
        return null_error("out");
    }
    match analysis::exact_success_prob(formula) {
        Ok(value) => {
            *out = value;
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Monte Carlo estimate of the per-pass success probability.
///
/// # Safety
/// `handle` must be a live formula handle; out-pointers may be null when
/// the caller does not need them.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_monte_carlo_success(
    handle: *const dkcsp_formula,
    trials: u64,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
    successes: *mut u64,
) -> i32 {
    let Some(formula) = formula_ref(handle) else {
        return null_error("handle");
    };
    if trials < 1 {
        return set_error(DKCSP_ERR_INVALID_ARGUMENT, "need at least one trial".into());
    }
    let est = analysis::monte_carlo_success(formula, trials, seed);
    if !estimate.is_null() {
        *estimate = est.estimate;
    }
    if !std_error.is_null() {
        *std_error = est.std_error;
    }
    if !successes.is_null() {
        *successes = est.successes;
    }
    DKCSP_OK
}

/// Per-variable success exponent by adaptive quadrature; `tolerance <= 0`
/// selects the default.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_g_quadrature(d: u32, k: u32, tolerance: f64, out: *mut f64) -> i32 {
    if out.is_null() {
        return null_error("out");
    }
    let tolerance = if tolerance <= 0.0 {
        bounds::DEFAULT_QUADRATURE_TOL
    } else {
        tolerance
    };
    match bounds::g_quadrature(d, k, tolerance) {
        Ok(value) => {
            *out = value.exponent;
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Per-variable success exponent through the beta-function closed form.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_g_closed_form(d: u32, k: u32, out: *mut f64) -> i32 {
    if out.is_null() {
        return null_error("out");
    }
    match bounds::g_closed_form(d, k) {
        Ok(value) => {
            *out = value.exponent;
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// Random-walk reference exponent `log2(d(k-1)/k)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_schoening_exponent(d: u32, k: u32, out: *mut f64) -> i32 {
    if out.is_null() {
        return null_error("out");
    }
    match bounds::schoening_exponent(d, k) {
        Ok(value) => {
            *out = value;
            DKCSP_OK
        }
        Err(err) => set_lib_error(err),
    }
}

/// The weaker exponent `log2((d(k-1)+1)/k)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dkcsp_suboptimal_exponent(d: u32, k: u32, out: *mut f64) -> i32 {
    if out.is_null() {
        return null_error("out");
    }
    if d < 1 || k < 1 {
        return set_error(DKCSP_ERR_INVALID_ARGUMENT, "need d >= 1 and k >= 1".into());
    }
    *out = bounds::suboptimal_exponent(d, k);
    DKCSP_OK
}
