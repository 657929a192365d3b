//! C interface to the rollsim simulator.
//!
//! Scenarios and trajectories are opaque handles created and released by
//! this library. Every fallible call returns a [`RollsimStatus`]; the
//! message for the last failure on the calling thread is available from
//! [`rollsim_last_error`]. Arrays are copied into caller buffers: pass the
//! buffer length in elements and check for `BufferTooSmall`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rollsim::ball::{self, BallSystem};
use rollsim::disk::DiskSystem;
use rollsim::run::{run_to_dir, simulate};
use rollsim::scenario::{bundled, Model, Scenario};
use rollsim::{Method, OdeSystem, SimError};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollsimStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid scenario, parse failure, or an unmet precondition.
    Validation = 2,
    /// Singular mass matrix, divergence, step underflow or a failed
    /// implicit step.
    Numerical = 3,
    /// Step budget exhausted.
    Budget = 4,
    Io = 5,
    InvalidArgument = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollsimMethod {
    Rk4 = 0,
    Rk45 = 1,
    ImplicitTrap = 2,
}

/// A validated scenario together with its built model.
pub struct RollsimScenario {
    scenario: Scenario,
    model: Model,
}

/// Samples of a completed run.
pub struct RollsimTrajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
    steps: usize,
    rejected: usize,
    rhs_evals: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &SimError) -> RollsimStatus {
    match e.exit_code() {
        2 => RollsimStatus::Validation,
        3 => RollsimStatus::Numerical,
        4 => RollsimStatus::Budget,
        _ => RollsimStatus::Io,
    }
}

fn fail(e: SimError) -> RollsimStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guard(f: impl FnOnce() -> RollsimStatus) -> RollsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            RollsimStatus::Panic
        }
    }
}

fn null(what: &str) -> RollsimStatus {
    set_error(format!("{what} is null"));
    RollsimStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, RollsimStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        RollsimStatus::InvalidArgument
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> RollsimStatus {
    if buf.is_null() {
        return null("buffer");
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return RollsimStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    RollsimStatus::Ok
}

unsafe fn emit_scenario(sc: Scenario, out: *mut *mut RollsimScenario) -> RollsimStatus {
    match sc.build() {
        Ok(model) => {
            *out = Box::into_raw(Box::new(RollsimScenario { scenario: sc, model }));
            RollsimStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rollsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and return the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rollsim_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parse and validate a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut RollsimScenario,
) -> RollsimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_toml(text) {
            Ok(sc) => emit_scenario(sc, out),
            Err(e) => fail(e),
        }
    })
}

/// Load a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_from_file(
    path: *const c_char,
    out: *mut *mut RollsimScenario,
) -> RollsimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::load(Path::new(path)) {
            Ok(sc) => emit_scenario(sc, out),
            Err(e) => fail(e),
        }
    })
}

/// Load one of the scenarios shipped with the library by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_bundled(
    name: *const c_char,
    out: *mut *mut RollsimScenario,
) -> RollsimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match bundled(name) {
            Ok(sc) => emit_scenario(sc, out),
            Err(e) => fail(e),
        }
    })
}

/// Release a scenario. Null is ignored.
///
/// # Safety
/// `sc` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_free(sc: *mut RollsimScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Length of the system state vector.
///
/// # Safety
/// `sc` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_state_dim(sc: *const RollsimScenario, out: *mut usize) -> RollsimStatus {
    guard(|| {
        let (Some(sc), false) = (sc.as_ref(), out.is_null()) else {
            return null("argument");
        };
        *out = sc.model.initial_state().len();
        RollsimStatus::Ok
    })
}

/// Copy the initial state into `buf`.
///
/// # Safety
/// `sc` must be a live scenario handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_initial_state(
    sc: *const RollsimScenario,
    buf: *mut f64,
    len: usize,
) -> RollsimStatus {
    guard(|| match sc.as_ref() {
        Some(sc) => copy_out(sc.model.initial_state(), buf, len),
        None => null("scenario"),
    })
}

/// Evaluate the right-hand side of the equations of motion at `(t, x)`.
/// Both `x` and `dx` have `n` elements, which must equal the state length.
///
/// # Safety
/// `sc` must be a live scenario handle; `x` and `dx` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_rhs(
    sc: *const RollsimScenario,
    t: f64,
    x: *const f64,
    dx: *mut f64,
    n: usize,
) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_ref() else { return null("scenario") };
        if x.is_null() || dx.is_null() {
            return null("state buffer");
        }
        let dim = sc.model.initial_state().len();
        if n != dim {
            set_error(format!("state has length {n}, expected {dim}"));
            return RollsimStatus::InvalidArgument;
        }
        let x = std::slice::from_raw_parts(x, n);
        let dx = std::slice::from_raw_parts_mut(dx, n);
        let r = match &sc.model {
            Model::Ball { params, .. } => {
                ball::frame_vars(params, t, x).and_then(|_| BallSystem { params }.rhs(t, x, dx))
            }
            Model::Disk { params, .. } => DiskSystem { params }.rhs(t, x, dx),
            Model::RigidBody { body, .. } => body.rhs(t, x, dx),
            Model::HeavyTop { top, .. } => top.rhs(t, x, dx),
            Model::Suslov { body, .. } => body.rhs(t, x, dx),
        };
        match r {
            Ok(()) => RollsimStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Override the integration method.
///
/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_set_method(sc: *mut RollsimScenario, method: RollsimMethod) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_mut() else { return null("scenario") };
        sc.scenario.integrator.method = match method {
            RollsimMethod::Rk4 => Method::Rk4,
            RollsimMethod::Rk45 => Method::Rk45,
            RollsimMethod::ImplicitTrap => Method::ImplicitTrap,
        };
        RollsimStatus::Ok
    })
}

/// Override the absolute and relative tolerances.
///
/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_set_tolerances(
    sc: *mut RollsimScenario,
    atol: f64,
    rtol: f64,
) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_mut() else { return null("scenario") };
        if !(atol > 0.0 && rtol > 0.0 && atol.is_finite() && rtol.is_finite()) {
            set_error("tolerances must be positive");
            return RollsimStatus::InvalidArgument;
        }
        sc.scenario.integrator.atol = atol;
        sc.scenario.integrator.rtol = rtol;
        RollsimStatus::Ok
    })
}

/// Override the number of output samples (at least 2).
///
/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn rollsim_scenario_set_samples(sc: *mut RollsimScenario, samples: usize) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_mut() else { return null("scenario") };
        if samples < 2 {
            set_error("need at least 2 samples");
            return RollsimStatus::InvalidArgument;
        }
        sc.scenario.output.samples = samples;
        RollsimStatus::Ok
    })
}

/// Integrate the scenario.
///
/// # Safety
/// `sc` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rollsim_simulate(
    sc: *const RollsimScenario,
    out: *mut *mut RollsimTrajectory,
) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_ref() else { return null("scenario") };
        if out.is_null() {
            return null("out");
        }
        let run = match simulate(&sc.scenario) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let len = run.trajectory.len();
        let dim = run.state(0).len();
        let states = (0..len).flat_map(|k| run.state(k).iter().copied()).collect();
        let st = run.trajectory.stats;
        *out = Box::into_raw(Box::new(RollsimTrajectory {
            times: run.trajectory.times.clone(),
            states,
            dim,
            steps: st.steps,
            rejected: st.rejected,
            rhs_evals: st.rhs_evals,
        }));
        RollsimStatus::Ok
    })
}

/// Integrate and write the run directory `<root>/<scenario name>/`.
///
/// # Safety
/// `sc` must be a live scenario handle and `root` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rollsim_run_to_dir(sc: *const RollsimScenario, root: *const c_char) -> RollsimStatus {
    guard(|| {
        let Some(sc) = sc.as_ref() else { return null("scenario") };
        let root = match str_arg(root, "root") {
            Ok(r) => r,
            Err(s) => return s,
        };
        match run_to_dir(&sc.scenario, Path::new(root)) {
            Ok(_) => RollsimStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of samples.
///
/// # Safety
/// `tr` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_len(tr: *const RollsimTrajectory) -> usize {
    tr.as_ref().map_or(0, |t| t.times.len())
}

/// State length of each sample.
///
/// # Safety
/// `tr` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_dim(tr: *const RollsimTrajectory) -> usize {
    tr.as_ref().map_or(0, |t| t.dim)
}

/// Accepted steps, rejected steps and right-hand side evaluations.
///
/// # Safety
/// `tr` must be a live trajectory handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_stats(
    tr: *const RollsimTrajectory,
    steps: *mut usize,
    rejected: *mut usize,
    rhs_evals: *mut usize,
) -> RollsimStatus {
    guard(|| {
        let Some(tr) = tr.as_ref() else { return null("trajectory") };
        if steps.is_null() || rejected.is_null() || rhs_evals.is_null() {
            return null("output");
        }
        *steps = tr.steps;
        *rejected = tr.rejected;
        *rhs_evals = tr.rhs_evals;
        RollsimStatus::Ok
    })
}

/// Copy the sample times (`len` elements).
///
/// # Safety
/// `tr` must be a live trajectory handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_times(
    tr: *const RollsimTrajectory,
    buf: *mut f64,
    len: usize,
) -> RollsimStatus {
    guard(|| match tr.as_ref() {
        Some(tr) => copy_out(&tr.times, buf, len),
        None => null("trajectory"),
    })
}

/// Copy the states row by row (`len * dim` elements).
///
/// # Safety
/// `tr` must be a live trajectory handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_states(
    tr: *const RollsimTrajectory,
    buf: *mut f64,
    len: usize,
) -> RollsimStatus {
    guard(|| match tr.as_ref() {
        Some(tr) => copy_out(&tr.states, buf, len),
        None => null("trajectory"),
    })
}

/// Release a trajectory. Null is ignored.
///
/// # Safety
/// `tr` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rollsim_trajectory_free(tr: *mut RollsimTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}
