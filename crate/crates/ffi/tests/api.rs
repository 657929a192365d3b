use std::ffi::CString;
use std::ptr;

use rollsim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { rollsim_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn bundled(name: &str) -> *mut RollsimScenario {
    let name = CString::new(name).unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { rollsim_scenario_bundled(name.as_ptr(), &mut sc) }, RollsimStatus::Ok);
    sc
}

#[test]
fn simulate_bundled_disk() {
    let sc = bundled("disk_single_mass_newton");
    unsafe {
        let mut dim = 0;
        assert_eq!(rollsim_scenario_state_dim(sc, &mut dim), RollsimStatus::Ok);
        assert_eq!(dim, 4);
        let mut x0 = vec![0.0; dim];
        assert_eq!(rollsim_scenario_initial_state(sc, x0.as_mut_ptr(), dim), RollsimStatus::Ok);
        assert_eq!(x0[0], -std::f64::consts::FRAC_PI_2);
        assert_eq!(rollsim_scenario_set_samples(sc, 11), RollsimStatus::Ok);
        let mut tr = ptr::null_mut();
        assert_eq!(rollsim_simulate(sc, &mut tr), RollsimStatus::Ok);
        assert_eq!(rollsim_trajectory_len(tr), 11);
        assert_eq!(rollsim_trajectory_dim(tr), 4);
        let mut t = vec![0.0; 11];
        assert_eq!(rollsim_trajectory_times(tr, t.as_mut_ptr(), 11), RollsimStatus::Ok);
        assert_eq!((t[0], t[10]), (0.0, 20.0));
        let mut xs = vec![0.0; 44];
        assert_eq!(rollsim_trajectory_states(tr, xs.as_mut_ptr(), 10), RollsimStatus::BufferTooSmall);
        assert!(last_error().contains("44"));
        assert_eq!(rollsim_trajectory_states(tr, xs.as_mut_ptr(), 44), RollsimStatus::Ok);
        assert_eq!(&xs[..4], &x0[..]);
        let (mut s, mut r, mut f) = (0, 0, 0);
        assert_eq!(rollsim_trajectory_stats(tr, &mut s, &mut r, &mut f), RollsimStatus::Ok);
        assert!(s > 0 && f > s);
        rollsim_trajectory_free(tr);
        rollsim_scenario_free(sc);
    }
}

#[test]
fn ball_trajectory_has_system_dimension() {
    let sc = bundled("ball_paper_sec5");
    unsafe {
        rollsim_scenario_set_samples(sc, 3);
        rollsim_scenario_set_tolerances(sc, 1e-8, 1e-8);
        let mut tr = ptr::null_mut();
        assert_eq!(rollsim_simulate(sc, &mut tr), RollsimStatus::Ok);
        assert_eq!(rollsim_trajectory_dim(tr), 15);
        rollsim_trajectory_free(tr);
        rollsim_scenario_free(sc);
    }
}

#[test]
fn rhs_matches_initial_symmetry() {
    let sc = bundled("disk_paper_sec4");
    unsafe {
        let mut x = vec![0.0; 10];
        rollsim_scenario_initial_state(sc, x.as_mut_ptr(), 10);
        let mut dx = vec![1.0; 10];
        assert_eq!(rollsim_scenario_rhs(sc, 0.0, x.as_ptr(), dx.as_mut_ptr(), 10), RollsimStatus::Ok);
        assert!(dx[9].abs() < 1e-14);
        assert_eq!(dx[4], -1.0);
        assert_eq!(rollsim_scenario_rhs(sc, 0.0, x.as_ptr(), dx.as_mut_ptr(), 9), RollsimStatus::InvalidArgument);
        rollsim_scenario_free(sc);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut sc = ptr::null_mut();
        let bad = CString::new("name = \"x\"\nsystem = \"disk\"\ntspan = [0.0, 1.0]\n[disk]\nradius = 1.0\n").unwrap();
        assert_eq!(rollsim_scenario_from_toml(bad.as_ptr(), &mut sc), RollsimStatus::Validation);
        assert!(sc.is_null());
        assert!(last_error().contains("masses"));
        let junk = CString::new("not = [toml").unwrap();
        assert_eq!(rollsim_scenario_from_toml(junk.as_ptr(), &mut sc), RollsimStatus::Validation);
        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(rollsim_scenario_from_file(missing.as_ptr(), &mut sc), RollsimStatus::Io);
        assert_eq!(rollsim_scenario_from_toml(ptr::null(), &mut sc), RollsimStatus::NullPointer);
        let mut dim = 0;
        assert_eq!(rollsim_scenario_state_dim(ptr::null(), &mut dim), RollsimStatus::NullPointer);
        let mut tr = ptr::null_mut();
        assert_eq!(rollsim_simulate(ptr::null(), &mut tr), RollsimStatus::NullPointer);
        rollsim_scenario_free(ptr::null_mut());
        rollsim_trajectory_free(ptr::null_mut());
        assert_eq!(rollsim_trajectory_len(ptr::null()), 0);
    }
}

#[test]
fn budget_and_tolerance_arguments() {
    let sc = bundled("free_rigid_body");
    unsafe {
        assert_eq!(rollsim_scenario_set_tolerances(sc, 0.0, 1e-8), RollsimStatus::InvalidArgument);
        assert_eq!(rollsim_scenario_set_samples(sc, 1), RollsimStatus::InvalidArgument);
        rollsim_scenario_free(sc);
        let text = rollsim::scenario::bundled_source("free_rigid_body")
            .unwrap()
            .replace("rtol = 1e-12", "rtol = 1e-12\nmax_steps = 10");
        let text = CString::new(text).unwrap();
        let mut sc = ptr::null_mut();
        assert_eq!(rollsim_scenario_from_toml(text.as_ptr(), &mut sc), RollsimStatus::Ok);
        let mut tr = ptr::null_mut();
        assert_eq!(rollsim_simulate(sc, &mut tr), RollsimStatus::Budget);
        assert!(tr.is_null());
        rollsim_scenario_free(sc);
    }
}

#[test]
fn run_directory_and_method_override() {
    let dir = tempfile::tempdir().unwrap();
    let sc = bundled("suslov_fixed_xi");
    unsafe {
        assert_eq!(rollsim_scenario_set_method(sc, RollsimMethod::Rk4), RollsimStatus::Ok);
        rollsim_scenario_set_samples(sc, 51);
        let root = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(rollsim_run_to_dir(sc, root.as_ptr()), RollsimStatus::Ok);
        rollsim_scenario_free(sc);
    }
    let run = dir.path().join("suslov_fixed_xi");
    let meta = std::fs::read_to_string(run.join("meta.json")).unwrap();
    assert!(meta.contains("\"method\": \"rk4\""));
    let csv = std::fs::read_to_string(run.join("suslov_fixed_xi.csv")).unwrap();
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn version_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(rollsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
