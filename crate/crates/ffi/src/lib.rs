//! C interface to the swlab library.
//!
//! Every fallible function returns a [`SwlabStatus`]; on failure the message
//! is kept per thread and can be read with [`swlab_last_error`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use swlab::estimation::penalized_nll;
use swlab::lre_solver::SolverConfig;
use swlab::state_space::{entropy_rate, kalman_nll, simulate, Quarter, StateSpace, TimeSeriesPanel};
use swlab::sw_model::{self, EstimatedVector, Param, N_OBS};
use swlab::{Error, ErrorClass};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericalError = 4,
    Panic = 5,
}

/// A solved model: parameters plus their state-space form.
pub struct SwlabModel {
    theta: EstimatedVector,
    ss: StateSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SwlabStatus {
    match e.class() {
        ErrorClass::Usage => SwlabStatus::InvalidArgument,
        ErrorClass::Data => SwlabStatus::DataError,
        ErrorClass::Numerical => SwlabStatus::NumericalError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SwlabStatus, String)>) -> SwlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SwlabStatus::Panic
        }
    }
}

fn lib<T>(r: swlab::Result<T>) -> Result<T, (SwlabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SwlabStatus, String) {
    (SwlabStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (SwlabStatus, String) {
    (SwlabStatus::InvalidArgument, msg.into())
}

unsafe fn theta_from(theta: *const f64, len: usize) -> Result<EstimatedVector, (SwlabStatus, String)> {
    if theta.is_null() {
        return Err(null("theta"));
    }
    lib(EstimatedVector::new(std::slice::from_raw_parts(theta, len).to_vec()))
}

unsafe fn panel_from(data: *const f64, n_rows: usize) -> Result<TimeSeriesPanel, (SwlabStatus, String)> {
    if data.is_null() {
        return Err(null("data"));
    }
    let values = DMatrix::from_row_slice(n_rows, N_OBS, std::slice::from_raw_parts(data, n_rows * N_OBS));
    lib(TimeSeriesPanel::canonical(Quarter::new(1900, 1).expect("valid quarter"), values))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn swlab_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap()).as_ptr()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn swlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Number of estimated parameters.
#[no_mangle]
pub extern "C" fn swlab_param_count() -> usize {
    Param::ALL.len()
}

/// Name of estimated parameter `i` (static string), or null when out of range.
#[no_mangle]
pub extern "C" fn swlab_param_name(i: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| Param::ALL.iter().map(|p| CString::new(p.name()).unwrap()).collect());
    names.get(i).map_or(ptr::null(), |c| c.as_ptr())
}

/// Number of observable series (columns of every data buffer).
#[no_mangle]
pub extern "C" fn swlab_n_obs() -> usize {
    N_OBS
}

/// Write the shipped posterior mode into `out` (length `len`, which must
/// equal `swlab_param_count()`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swlab_posterior_mode(out: *mut f64, len: usize) -> SwlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = EstimatedVector::posterior_mode();
        if len != v.values().len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", v.values().len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(v.values());
        Ok(())
    })
}

/// Solve the model at `theta` (length `len`). Fails with
/// `NumericalError` unless a unique stable solution exists.
///
/// # Safety
/// `theta` must point to `len` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_new(theta: *const f64, len: usize, out: *mut *mut SwlabModel) -> SwlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let theta = theta_from(theta, len)?;
        let ss = lib(sw_model::state_space(&theta, &SolverConfig::default()))?;
        *out = Box::into_raw(Box::new(SwlabModel { theta, ss }));
        Ok(())
    })
}

/// Release a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from `swlab_model_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_free(model: *mut SwlabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of model states.
///
/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn swlab_model_n_states(model: *const SwlabModel) -> usize {
    model.as_ref().map_or(0, |m| m.ss.n_states())
}

/// Entropy rate (nats per time step) of the model's observables.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_entropy_rate(model: *const SwlabModel, out: *mut f64) -> SwlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(entropy_rate(&m.ss))?;
        Ok(())
    })
}

/// Gaussian negative log-likelihood of `n_rows` observations, stored row
/// by row with `swlab_n_obs()` columns in canonical series order.
///
/// # Safety
/// `data` must point to `n_rows * swlab_n_obs()` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_nll(
    model: *const SwlabModel,
    data: *const f64,
    n_rows: usize,
    out: *mut f64,
) -> SwlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let panel = panel_from(data, n_rows)?;
        *out = lib(kalman_nll(&m.ss, &panel))?.0;
        Ok(())
    })
}

/// Simulate `n_rows` observations after `burn_in` discarded steps into `out`
/// (row by row, `swlab_n_obs()` columns).
///
/// # Safety
/// `out` must point to `n_rows * swlab_n_obs()` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_simulate(
    model: *const SwlabModel,
    n_rows: usize,
    burn_in: usize,
    seed: u64,
    out: *mut f64,
) -> SwlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let panel = lib(simulate(&m.ss, n_rows, burn_in, seed))?;
        let dst = std::slice::from_raw_parts_mut(out, n_rows * N_OBS);
        for (i, row) in panel.values.row_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                dst[i * N_OBS + j] = *v;
            }
        }
        Ok(())
    })
}

/// Copy the model's parameters into `out` (length `swlab_param_count()`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_theta(model: *const SwlabModel, out: *mut f64, len: usize) -> SwlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != m.theta.values().len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", m.theta.values().len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(m.theta.values());
        Ok(())
    })
}

/// Estimation objective: NLL minus log prior. Never fails on a bad `theta`;
/// parameters outside the bounds or without a unique solution give the
/// penalty value (at least 1e10) instead.
///
/// # Safety
/// `theta` must point to `len` doubles, `data` to `n_rows * swlab_n_obs()`
/// doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn swlab_penalized_nll(
    theta: *const f64,
    len: usize,
    data: *const f64,
    n_rows: usize,
    out: *mut f64,
) -> SwlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let theta = theta_from(theta, len)?;
        let panel = panel_from(data, n_rows)?;
        *out = penalized_nll(&theta, &panel);
        Ok(())
    })
}

/// Symbolic name of a status (static string).
#[no_mangle]
pub extern "C" fn swlab_status_name(status: SwlabStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SwlabStatus::Ok => c"ok",
        SwlabStatus::NullPointer => c"null pointer",
        SwlabStatus::InvalidArgument => c"invalid argument",
        SwlabStatus::DataError => c"data error",
        SwlabStatus::NumericalError => c"numerical error",
        SwlabStatus::Panic => c"panic",
    };
    s.as_ptr()
}
