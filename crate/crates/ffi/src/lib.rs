//! C ABI for the knowledge-platform model.
//!
//! Conventions:
//! - parameters live behind an opaque handle created by
//!   [`commons_params_new`] / [`commons_params_from_json`] and released by
//!   [`commons_params_free`];
//! - every fallible call returns a [`CommonsStatus`] and writes results
//!   through out-pointers;
//! - on a non-OK status, [`commons_last_error_message`] returns a
//!   human-readable message for the calling thread, valid until that
//!   thread's next FFI call;
//! - environments are passed as `int` using the [`CommonsEnv`] values.
//!
//! The C header `include/commons.h` is generated from this file at build
//! time by cbindgen.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};

use commons_core::analysis;
use commons_core::dynamics::{self, GridSpec, Stability};
use commons_core::equilibrium::SolverOptions;
use commons_core::params::{Environment, ModelParams};
use commons_core::Error;

/// ABI revision; bump on any breaking change to this surface.
pub const COMMONS_ABI_VERSION: u32 = 1;

/// Status code of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    DomainError = 4,
    SolverFailed = 5,
    BufferTooSmall = 6,
}

/// Environment selector (pass as `int`).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonsEnv {
    Ho = 0,
    Ai = 1,
}

/// Opaque parameter handle.
pub struct CommonsParams {
    params: ModelParams,
    opts: SolverOptions,
}

/// Solved period equilibrium, flattened.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CommonsPeriod {
    pub k: f64,
    pub alpha_star: f64,
    pub pool: f64,
    pub surplus: f64,
    pub sigma: f64,
    pub mu: f64,
    pub c_star: f64,
    pub q_l: f64,
    pub q_h: f64,
    pub q_total: f64,
    pub omega: f64,
    pub delta_bar: f64,
    /// Knowledge creation including any conversion term.
    pub h: f64,
    pub collapsed: u8,
    pub full_participation: u8,
}

/// One steady state of the archive law of motion.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CommonsSteadyState {
    pub k_star: f64,
    pub residual: f64,
    /// 1 when locally stable, 0 when an unstable basin boundary.
    pub stable: u8,
}

/// Critical conversion rate report.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CommonsEtaReport {
    pub k_u: f64,
    pub eta_bar: f64,
    pub argmax_k: f64,
    pub limit_ratio: f64,
    pub feasible: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn fail(err: &Error) -> CommonsStatus {
    set_error(&err.to_string());
    match err {
        Error::Config(_) | Error::Params(_) => CommonsStatus::InvalidConfig,
        Error::Domain(_) => CommonsStatus::DomainError,
        Error::NoConvergence { .. } | Error::Bracket { .. } => CommonsStatus::SolverFailed,
    }
}

fn env_of(env: c_int) -> Result<Environment, CommonsStatus> {
    match env {
        0 => Ok(Environment::Ho),
        1 => Ok(Environment::Ai),
        other => {
            set_error(&format!(
                "unknown environment code {other} (0 = ho, 1 = ai)"
            ));
            Err(CommonsStatus::DomainError)
        }
    }
}

/// Last error message for this thread. Never null; empty before any failure.
/// The pointer stays valid until the thread's next FFI call.
#[no_mangle]
pub extern "C" fn commons_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// ABI revision of this library.
#[no_mangle]
pub extern "C" fn commons_abi_version() -> u32 {
    COMMONS_ABI_VERSION
}

/// Create a handle holding the baseline calibration.
#[no_mangle]
pub extern "C" fn commons_params_new() -> *mut CommonsParams {
    Box::into_raw(Box::new(CommonsParams {
        params: ModelParams::baseline(),
        opts: SolverOptions::default(),
    }))
}

/// Create a handle from a JSON document with blocks `shared`, `ho`, `ai`.
/// Missing fields keep their baseline values.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commons_params_from_json(
    json: *const c_char,
    out: *mut *mut CommonsParams,
) -> CommonsStatus {
    if json.is_null() || out.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config is not valid UTF-8");
            return CommonsStatus::InvalidUtf8;
        }
    };
    match ModelParams::from_json_str(text) {
        Ok(params) => {
            *out = Box::into_raw(Box::new(CommonsParams {
                params,
                opts: SolverOptions::default(),
            }));
            CommonsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `handle` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn commons_params_free(handle: *mut CommonsParams) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Solve the period equilibrium at stock `k` and fill `out`, including the
/// creation level `h` at conversion rate `eta`.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_solve_period(
    handle: *const CommonsParams,
    k: f64,
    env: c_int,
    eta: f64,
    out: *mut CommonsPeriod,
) -> CommonsStatus {
    if handle.is_null() || out.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    let env = match env_of(env) {
        Ok(e) => e,
        Err(status) => return status,
    };
    let eq = match commons_core::equilibrium::solve_period(k, env, &state.params, &state.opts) {
        Ok(eq) => eq,
        Err(e) => return fail(&e),
    };
    let h = match dynamics::creation(k, env, eta, &state.params, &state.opts) {
        Ok(h) => h,
        Err(e) => return fail(&e),
    };
    *out = CommonsPeriod {
        k,
        alpha_star: eq.alpha_star,
        pool: eq.pool,
        surplus: eq.surplus,
        sigma: eq.inner.sigma,
        mu: eq.inner.mu,
        c_star: eq.inner.c_star,
        q_l: eq.inner.q_l,
        q_h: eq.inner.q_h,
        q_total: eq.inner.q_total,
        omega: eq.inner.omega,
        delta_bar: eq.inner.delta_bar,
        h,
        collapsed: eq.collapsed as u8,
        full_participation: eq.full_participation as u8,
    };
    CommonsStatus::Ok
}

/// Expected new public knowledge h(k; eta).
///
/// # Safety
/// `handle` and `out_h` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_creation(
    handle: *const CommonsParams,
    k: f64,
    env: c_int,
    eta: f64,
    out_h: *mut f64,
) -> CommonsStatus {
    if handle.is_null() || out_h.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    let env = match env_of(env) {
        Ok(e) => e,
        Err(status) => return status,
    };
    match dynamics::creation(k, env, eta, &state.params, &state.opts) {
        Ok(h) => {
            *out_h = h;
            CommonsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Locate steady states of h(K; eta) = lambda K on the grid
/// [k_min, k_max] with `grid_n` points, refined to `refine_tol` in K.
/// Writes at most `capacity` entries to `out_buf` and the found count to
/// `out_len`; fails with `BufferTooSmall` when more states exist than fit.
///
/// # Safety
/// `handle`, `out_buf` (with room for `capacity` entries), and `out_len`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_steady_states(
    handle: *const CommonsParams,
    env: c_int,
    eta: f64,
    k_min: f64,
    k_max: f64,
    grid_n: usize,
    refine_tol: f64,
    out_buf: *mut CommonsSteadyState,
    capacity: usize,
    out_len: *mut usize,
) -> CommonsStatus {
    if handle.is_null() || out_buf.is_null() || out_len.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    let env = match env_of(env) {
        Ok(e) => e,
        Err(status) => return status,
    };
    let grid = GridSpec {
        k_min,
        k_max,
        n: grid_n,
    };
    let states =
        match dynamics::find_steady_states(env, eta, &grid, refine_tol, &state.params, &state.opts)
        {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
    *out_len = states.len();
    if states.len() > capacity {
        set_error(&format!(
            "{} steady states found but capacity is {capacity}",
            states.len()
        ));
        return CommonsStatus::BufferTooSmall;
    }
    for (i, st) in states.iter().enumerate() {
        *out_buf.add(i) = CommonsSteadyState {
            k_star: st.k_star,
            residual: st.residual,
            stable: (st.kind == Stability::Stable) as u8,
        };
    }
    CommonsStatus::Ok
}

/// Iterate the law of motion from `k0` for at most `max_steps`, stopping
/// when successive stocks differ by less than `conv_tol`. Writes the path
/// (including `k0`) into `out_path` up to `capacity` entries.
///
/// # Safety
/// `handle`, `out_path` (with room for `capacity` entries), `out_len`, and
/// `out_converged` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_simulate(
    handle: *const CommonsParams,
    k0: f64,
    max_steps: usize,
    env: c_int,
    eta: f64,
    conv_tol: f64,
    out_path: *mut f64,
    capacity: usize,
    out_len: *mut usize,
    out_converged: *mut u8,
) -> CommonsStatus {
    if handle.is_null() || out_path.is_null() || out_len.is_null() || out_converged.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    let env = match env_of(env) {
        Ok(e) => e,
        Err(status) => return status,
    };
    let traj = match dynamics::simulate(
        k0,
        max_steps,
        env,
        eta,
        &state.params,
        conv_tol,
        &state.opts,
    ) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    *out_len = traj.k_path.len();
    if traj.k_path.len() > capacity {
        set_error(&format!(
            "path has {} entries but capacity is {capacity}",
            traj.k_path.len()
        ));
        return CommonsStatus::BufferTooSmall;
    }
    for (i, k) in traj.k_path.iter().enumerate() {
        *out_path.add(i) = *k;
    }
    *out_converged = traj.converged as u8;
    CommonsStatus::Ok
}

/// Critical conversion rate for eliminating the low-archive basin.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_critical_eta(
    handle: *const CommonsParams,
    grid_n: usize,
    out: *mut CommonsEtaReport,
) -> CommonsStatus {
    if handle.is_null() || out.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    match analysis::critical_eta(&state.params, grid_n, &state.opts) {
        Ok(rep) => {
            *out = CommonsEtaReport {
                k_u: rep.k_u,
                eta_bar: rep.eta_bar,
                argmax_k: rep.argmax_k,
                limit_ratio: rep.limit_ratio,
                feasible: rep.feasible as u8,
            };
            CommonsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Whether conversion at rate `eta` lifts average creation above
/// depreciation on the entire threshold region.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn commons_basin_eliminated(
    handle: *const CommonsParams,
    eta: f64,
    grid_n: usize,
    out: *mut u8,
) -> CommonsStatus {
    if handle.is_null() || out.is_null() {
        set_error("null argument");
        return CommonsStatus::NullArgument;
    }
    let state = &*handle;
    match analysis::basin_eliminated(eta, &state.params, grid_n, &state.opts) {
        Ok(b) => {
            *out = b as u8;
            CommonsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn solve_through_the_abi() {
        let handle = commons_params_new();
        let mut out = unsafe { std::mem::zeroed::<CommonsPeriod>() };
        let status = unsafe { commons_solve_period(handle, 0.51, 1, 0.0, &mut out) };
        assert_eq!(status, CommonsStatus::Ok);
        assert_eq!(out.collapsed, 0);
        assert!((out.h / 0.51 - 0.49).abs() <= 0.02);
        assert!((out.sigma - 0.5881).abs() < 1e-3);
        unsafe { commons_params_free(handle) };
    }

    #[test]
    fn json_roundtrip_and_steady_states() {
        let json = std::ffi::CString::new(r#"{"shared": {"kappa": 3.0}}"#).unwrap();
        let mut handle: *mut CommonsParams = ptr::null_mut();
        let status = unsafe { commons_params_from_json(json.as_ptr(), &mut handle) };
        assert_eq!(status, CommonsStatus::Ok);
        let mut buf = [CommonsSteadyState {
            k_star: 0.0,
            residual: 0.0,
            stable: 0,
        }; 8];
        let mut len = 0usize;
        let status = unsafe {
            commons_steady_states(
                handle,
                1,
                0.0,
                1e-3,
                4.0,
                400,
                1e-9,
                buf.as_mut_ptr(),
                buf.len(),
                &mut len,
            )
        };
        assert_eq!(status, CommonsStatus::Ok);
        assert_eq!(len, 2);
        assert!((buf[0].k_star - 0.31).abs() <= 0.02);
        assert_eq!(buf[0].stable, 0);
        assert_eq!(buf[1].stable, 1);
        unsafe { commons_params_free(handle) };
    }

    #[test]
    fn error_paths_set_messages() {
        let mut handle: *mut CommonsParams = ptr::null_mut();
        let status = unsafe { commons_params_from_json(ptr::null(), &mut handle) };
        assert_eq!(status, CommonsStatus::NullArgument);

        let bad = std::ffi::CString::new(r#"{"shared": {"kapa": 1}}"#).unwrap();
        let status = unsafe { commons_params_from_json(bad.as_ptr(), &mut handle) };
        assert_eq!(status, CommonsStatus::InvalidConfig);
        let msg = unsafe { CStr::from_ptr(commons_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("kapa"));

        let handle = commons_params_new();
        let mut out = unsafe { std::mem::zeroed::<CommonsPeriod>() };
        let status = unsafe { commons_solve_period(handle, -1.0, 1, 0.0, &mut out) };
        assert_eq!(status, CommonsStatus::DomainError);
        let status = unsafe { commons_solve_period(handle, 1.0, 7, 0.0, &mut out) };
        assert_eq!(status, CommonsStatus::DomainError);
        unsafe { commons_params_free(handle) };
    }

    #[test]
    fn buffer_too_small_reports_needed_length() {
        let handle = commons_params_new();
        let mut one = [CommonsSteadyState {
            k_star: 0.0,
            residual: 0.0,
            stable: 0,
        }; 1];
        let mut len = 0usize;
        let status = unsafe {
            commons_steady_states(
                handle,
                1,
                0.0,
                1e-3,
                4.0,
                400,
                1e-9,
                one.as_mut_ptr(),
                1,
                &mut len,
            )
        };
        assert_eq!(status, CommonsStatus::BufferTooSmall);
        assert_eq!(len, 2);
        unsafe { commons_params_free(handle) };
    }

    #[test]
    fn simulate_and_eta_through_the_abi() {
        let handle = commons_params_new();
        let mut path = vec![0.0f64; 4096];
        let mut len = 0usize;
        let mut converged = 0u8;
        let status = unsafe {
            commons_simulate(
                handle,
                0.5,
                4000,
                1,
                0.0,
                1e-10,
                path.as_mut_ptr(),
                path.len(),
                &mut len,
                &mut converged,
            )
        };
        assert_eq!(status, CommonsStatus::Ok);
        assert_eq!(converged, 1);
        assert!((path[len - 1] - 1.5535).abs() < 0.005);

        let mut report = unsafe { std::mem::zeroed::<CommonsEtaReport>() };
        let status = unsafe { commons_critical_eta(handle, 500, &mut report) };
        assert_eq!(status, CommonsStatus::Ok);
        assert!((report.eta_bar - 0.51).abs() <= 0.02);
        assert_eq!(report.feasible, 1);

        let mut flag = 0u8;
        let status = unsafe { commons_basin_eliminated(handle, 0.77, 500, &mut flag) };
        assert_eq!(status, CommonsStatus::Ok);
        assert_eq!(flag, 1);
        unsafe { commons_params_free(handle) };
    }

    #[test]
    fn abi_version_is_exported() {
        assert_eq!(commons_abi_version(), COMMONS_ABI_VERSION);
    }
}
