//! Rolling ball driven by point masses moving on body-fixed rails.
//!
//! State layout for `n` moving masses (length `2n + 9`):
//! `[theta (n), theta_dot (n), q0..q3, Omega (3), z (2)]`.

use nalgebra::DMatrix;

use crate::error::{Result, SimError};
use crate::integrate::{jacobian_fd, OdeSystem};
use crate::rails::{AccelProfile, Rail, RailPoint};
use crate::so3::{hat_sq, quat_from_slice, quat_kinematics, rotation_unchecked, Mat3, Quat, Vec3};

pub const SINGULAR_COND: f64 = 1e12;
pub const FRAME_VERSOR_TOL: f64 = 1e-6;

/// External force on the geometric center, given in the spatial frame.
#[derive(Debug, Clone, PartialEq)]
pub enum ExternalForce {
    Constant(Vec3),
    /// Piecewise-linear table per spatial component.
    Table([AccelProfile; 3]),
}

impl ExternalForce {
    pub fn zero() -> Self {
        ExternalForce::Constant(Vec3::zeros())
    }

    pub fn at(&self, t: f64) -> Vec3 {
        match self {
            ExternalForce::Constant(f) => *f,
            ExternalForce::Table(c) => Vec3::new(c[0].eval(t), c[1].eval(t), c[2].eval(t)),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            ExternalForce::Constant(_) => vec![],
            ExternalForce::Table(c) => c.iter().flat_map(|p| p.times()).collect(),
        }
    }
}

/// Breakpoint times of the acceleration profiles and force table.
pub fn kink_times(accels: &[AccelProfile], force: &ExternalForce) -> Vec<f64> {
    let mut v: Vec<f64> = accels.iter().flat_map(|p| p.times()).chain(force.times()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone)]
pub struct BallParams {
    /// `m0` (ball with its static structure) followed by the moving masses.
    pub masses: Vec<f64>,
    pub radius: f64,
    pub inertia: Vec3,
    pub gravity: f64,
    /// Center of mass of the static structure, measured from the center.
    pub cm_offset: Vec3,
    pub rails: Vec<Rail>,
    pub accels: Vec<AccelProfile>,
    pub force: ExternalForce,
}

impl BallParams {
    pub fn n(&self) -> usize {
        self.rails.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() + 9
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |m: String| Err(SimError::Validation(m));
        if self.masses.len() != n + 1 {
            return bad(format!(
                "expected {} masses (static structure plus {n} rails), got {}",
                n + 1,
                self.masses.len()
            ));
        }
        if self.accels.len() != n {
            return bad(format!("expected {n} acceleration profiles, got {}", self.accels.len()));
        }
        if self.masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return bad("all masses must be positive".into());
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return bad("radius must be positive".into());
        }
        if self.inertia.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return bad("principal moments of inertia must be positive".into());
        }
        if !(self.gravity >= 0.0) || !self.gravity.is_finite() {
            return bad("gravity must be non-negative".into());
        }
        if !self.cm_offset.iter().all(|c| c.is_finite()) {
            return bad("cm_offset must be finite".into());
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout { n: self.n() }
    }

    fn rail_point(&self, i: usize, theta: f64) -> RailPoint {
        if i == 0 {
            RailPoint { pos: self.cm_offset, d1: Vec3::zeros(), d2: Vec3::zeros() }
        } else {
            self.rails[i - 1].eval(theta)
        }
    }

    pub fn controls(&self, t: f64) -> Vec<f64> {
        self.accels.iter().map(|p| p.eval(t)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn theta(&self) -> std::ops::Range<usize> {
        0..self.n
    }
    pub fn theta_dot(&self) -> std::ops::Range<usize> {
        self.n..2 * self.n
    }
    pub fn q(&self) -> usize {
        2 * self.n
    }
    pub fn omega(&self) -> usize {
        2 * self.n + 4
    }
    pub fn z(&self) -> usize {
        2 * self.n + 7
    }
    pub fn dim(&self) -> usize {
        2 * self.n + 9
    }
}

/// Assemble a state vector.
pub fn pack_state(theta: &[f64], theta_dot: &[f64], q: [f64; 4], omega: Vec3, z: [f64; 2]) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * theta.len() + 9);
    x.extend_from_slice(theta);
    x.extend_from_slice(theta_dot);
    x.extend_from_slice(&q);
    x.extend_from_slice(omega.as_slice());
    x.extend_from_slice(&z);
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameVars {
    pub rotation: Mat3,
    pub vertical: Vec3,
    pub force_body: Vec3,
    pub omega_spatial: Vec3,
}

fn omega_of(x: &[f64], l: Layout) -> Vec3 {
    let o = l.omega();
    Vec3::new(x[o], x[o + 1], x[o + 2])
}

fn q_of(x: &[f64], l: Layout) -> Quat {
    quat_from_slice(&x[l.q()..l.q() + 4])
}

fn frame_from_quat(p: &BallParams, t: f64, q: &Quat, omega: &Vec3) -> FrameVars {
    let rotation = rotation_unchecked(&(q / q.norm()));
    let lt = rotation.transpose();
    FrameVars { rotation, vertical: lt * Vec3::z(), force_body: lt * p.force.at(t), omega_spatial: rotation * omega }
}

/// Rotation, body-frame vertical, body-frame external force and spatial
/// angular velocity. Requires a unit quaternion to within 1e-6.
pub fn frame_vars(p: &BallParams, t: f64, x: &[f64]) -> Result<FrameVars> {
    let l = p.layout();
    let q = q_of(x, l);
    let dev = (q.norm() - 1.0).abs();
    if !(dev <= FRAME_VERSOR_TOL) {
        return Err(SimError::Validation(format!("attitude quaternion is not unit (| |q| - 1 | = {dev:.3e})")));
    }
    Ok(frame_from_quat(p, t, &q, &omega_of(x, l)))
}

/// Solve `A w = b` for the symmetric negative definite `A`.
fn solve_mass_matrix(a: &Mat3, b: &Vec3, t: f64, x: &[f64]) -> Result<Vec3> {
    let neg = -a;
    let tr = neg.trace();
    let dmin = neg.diagonal().min();
    let singular = |cond: f64| SimError::Singular { t, cond, state: x.to_vec() };
    // The spectrum of -A lies in [lambda_min, trace]; only pay for an
    // eigen decomposition when the cheap bound is inconclusive.
    if !(dmin > 0.0) || tr / dmin > SINGULAR_COND {
        let eig = neg.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(cond <= SINGULAR_COND) {
            return Err(singular(cond));
        }
    }
    let chol = neg.cholesky().ok_or_else(|| singular(f64::INFINITY))?;
    Ok(-chol.solve(b))
}

/// Body angular acceleration for accelerations `u` of the moving masses.
pub fn omega_dot(p: &BallParams, t: f64, x: &[f64], u: &[f64]) -> Result<Vec3> {
    let l = p.layout();
    let omega = omega_of(x, l);
    let fv = frame_from_quat(p, t, &q_of(x, l), &omega);
    let gam = fv.vertical;
    let r = p.radius;
    let inertia = Mat3::from_diagonal(&p.inertia);

    let mut a = -inertia;
    let mut b = omega.cross(&(inertia * omega)) + (fv.force_body * r).cross(&gam);
    for i in 0..=p.n() {
        let (th, thd, thdd) = if i == 0 { (0.0, 0.0, 0.0) } else { (x[i - 1], x[l.n + i - 1], u[i - 1]) };
        let rp = p.rail_point(i, th);
        let m = p.masses[i];
        let s = gam * r + rp.pos;
        a += hat_sq(&s) * m;
        let acc = gam * p.gravity
            + omega.cross(&(omega.cross(&rp.pos) + rp.d1 * (2.0 * thd)))
            + rp.d2 * (thd * thd)
            + rp.d1 * thdd;
        b += s.cross(&acc) * m;
    }
    solve_mass_matrix(&a, &b, t, x)
}

/// Full right-hand side with explicit mass accelerations `u`.
pub fn rhs_ode(p: &BallParams, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()> {
    let l = p.layout();
    let n = l.n;
    let omega = omega_of(x, l);
    let q = q_of(x, l);
    dx[..n].copy_from_slice(&x[n..2 * n]);
    dx[n..2 * n].copy_from_slice(u);
    let qd = quat_kinematics(&q, &omega);
    dx[l.q()] = qd.w;
    dx[l.q() + 1] = qd.i;
    dx[l.q() + 2] = qd.j;
    dx[l.q() + 3] = qd.k;
    let wd = omega_dot(p, t, x, u)?;
    dx[l.omega()..l.omega() + 3].copy_from_slice(wd.as_slice());
    let w = frame_from_quat(p, t, &q, &omega).omega_spatial;
    dx[l.z()] = p.radius * w.y;
    dx[l.z() + 1] = -p.radius * w.x;
    Ok(())
}

/// Residual `g(t, x, u) - M x_dot` of the semi-explicit DAE form. Rows:
/// `theta`, `theta_dot`, `|q|^2 - 1`, vector part of the quaternion
/// kinematics, `Omega`, `z`.
pub fn dae_residual(p: &BallParams, t: f64, x: &[f64], xdot: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let l = p.layout();
    let n = l.n;
    let mut f = vec![0.0; l.dim()];
    rhs_ode(p, t, x, u, &mut f)?;
    let q = q_of(x, l);
    let mut res = Vec::with_capacity(l.dim());
    for k in 0..2 * n {
        res.push(f[k] - xdot[k]);
    }
    res.push(q.norm_squared() - 1.0);
    for k in l.q() + 1..l.dim() {
        res.push(f[k] - xdot[k]);
    }
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

pub fn energy(p: &BallParams, t: f64, x: &[f64]) -> Energy {
    let l = p.layout();
    let omega = omega_of(x, l);
    let gam = frame_from_quat(p, t, &q_of(x, l), &omega).vertical;
    let inertia = Mat3::from_diagonal(&p.inertia);
    let mut kinetic = 0.5 * omega.dot(&(inertia * omega));
    let mut potential = 0.0;
    for i in 0..=p.n() {
        let (th, thd) = if i == 0 { (0.0, 0.0) } else { (x[i - 1], x[l.n + i - 1]) };
        let rp = p.rail_point(i, th);
        let s = gam * p.radius + rp.pos;
        let y = omega.cross(&s) + rp.d1 * thd;
        kinetic += 0.5 * p.masses[i] * y.norm_squared();
        potential += p.gravity * p.masses[i] * rp.pos.dot(&gam);
    }
    Energy { kinetic, potential }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassPositions {
    /// Index 0 is the static structure's center of mass.
    pub body: Vec<Vec3>,
    pub spatial: Vec<Vec3>,
    pub cm_body: Vec3,
    pub cm_spatial: Vec3,
}

/// Mass positions relative to the geometric center, in body and spatial axes.
pub fn mass_positions(p: &BallParams, x: &[f64]) -> MassPositions {
    let l = p.layout();
    let rot = rotation_unchecked(&(q_of(x, l) / q_of(x, l).norm()));
    let body: Vec<Vec3> = (0..=p.n()).map(|i| p.rail_point(i, if i == 0 { 0.0 } else { x[i - 1] }).pos).collect();
    let spatial: Vec<Vec3> = body.iter().map(|b| rot * b).collect();
    let mtot = p.total_mass();
    let cm_body = body.iter().zip(&p.masses).fold(Vec3::zeros(), |acc, (b, m)| acc + b * *m) / mtot;
    MassPositions { cm_spatial: rot * cm_body, body, spatial, cm_body }
}

pub fn jacobian(p: &BallParams, t: f64, x: &[f64], rel: f64) -> Result<DMatrix<f64>> {
    jacobian_fd(&BallSystem { params: p }, t, x, rel)
}

/// Lump the masses frozen at angles `theta` into a single rigid structure:
/// total mass, its center of mass, and its inertia about that point.
pub fn lump_frozen(p: &BallParams, theta: &[f64]) -> (f64, Vec3, Mat3) {
    let mtot = p.total_mass();
    let pos: Vec<Vec3> = (0..=p.n()).map(|i| p.rail_point(i, if i == 0 { 0.0 } else { theta[i - 1] }).pos).collect();
    let cm = pos.iter().zip(&p.masses).fold(Vec3::zeros(), |a, (x, m)| a + x * *m) / mtot;
    let mut inertia = Mat3::from_diagonal(&p.inertia);
    for (x, m) in pos.iter().zip(&p.masses) {
        inertia -= hat_sq(&(x - cm)) * *m;
    }
    (mtot, cm, inertia)
}

/// Angular acceleration of a rolling ball whose interior is one rigid body
/// of the given mass, center of mass offset and (full) inertia.
#[allow(clippy::too_many_arguments)]
pub fn static_ball_omega_dot(
    mass: f64,
    cm_offset: &Vec3,
    inertia: &Mat3,
    radius: f64,
    gravity: f64,
    vertical: &Vec3,
    force_body: &Vec3,
    omega: &Vec3,
) -> Result<Vec3> {
    let s = vertical * radius + cm_offset;
    let a = hat_sq(&s) * mass - inertia;
    let b = omega.cross(&(inertia * omega))
        + (force_body * radius).cross(vertical)
        + s.cross(&(vertical * gravity + omega.cross(&omega.cross(cm_offset)))) * mass;
    solve_mass_matrix(&a, &b, 0.0, &[])
}

/// The ball as an [`OdeSystem`], with prescribed mass accelerations.
pub struct BallSystem<'a> {
    pub params: &'a BallParams,
}

impl OdeSystem for BallSystem<'_> {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let u = self.params.controls(t);
        rhs_ode(self.params, t, x, &u, dx)
    }

    fn project(&self, x: &mut [f64]) -> bool {
        normalize_quat(&mut x[self.params.layout().q()..self.params.layout().q() + 4])
    }

    fn breakpoints(&self) -> Vec<f64> {
        kink_times(&self.params.accels, &self.params.force)
    }
}

pub(crate) fn normalize_quat(q: &mut [f64]) -> bool {
    let nrm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if nrm > 0.0 && nrm != 1.0 {
        for v in q.iter_mut() {
            *v /= nrm;
        }
        true
    } else {
        false
    }
}

/// The ball state extended by a separately integrated body-frame vertical
/// `Gamma' = Gamma x Omega` (three extra trailing components).
pub struct BallWithVertical<'a> {
    pub params: &'a BallParams,
}

impl OdeSystem for BallWithVertical<'_> {
    fn dim(&self) -> usize {
        self.params.dim() + 3
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let d = self.params.dim();
        let u = self.params.controls(t);
        rhs_ode(self.params, t, &x[..d], &u, &mut dx[..d])?;
        let om = omega_of(x, self.params.layout());
        let g = Vec3::new(x[d], x[d + 1], x[d + 2]);
        dx[d..].copy_from_slice(g.cross(&om).as_slice());
        Ok(())
    }

    fn project(&self, x: &mut [f64]) -> bool {
        normalize_quat(&mut x[self.params.layout().q()..self.params.layout().q() + 4])
    }

    fn breakpoints(&self) -> Vec<f64> {
        kink_times(&self.params.accels, &self.params.force)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::so3::{check_versor, quat};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn hoop_ball() -> BallParams {
        BallParams {
            masses: vec![1.0; 4],
            radius: 1.0,
            inertia: Vec3::new(0.9, 1.0, 1.1),
            gravity: 1.0,
            cm_offset: Vec3::new(0.0, 0.0, -0.05),
            rails: vec![
                Rail::circle(0.95, Vec3::zeros(), [0.0, 0.0, 1.0]).unwrap(),
                Rail::circle(0.9, Vec3::zeros(), [FRAC_PI_2, 0.0, 1.0]).unwrap(),
                Rail::circle(0.85, Vec3::zeros(), [FRAC_PI_4, FRAC_PI_4, 1.0]).unwrap(),
            ],
            accels: vec![AccelProfile::short_pulse(1.0); 3],
            force: ExternalForce::zero(),
        }
    }

    fn cm_above_start() -> Vec<f64> {
        pack_state(&[0.0, 2.0369, 0.7044], &[0.0; 3], [1.0, 0.0, 0.0, 0.0], Vec3::zeros(), [0.0, 0.0])
    }

    fn bare_ball(cm: Vec3) -> BallParams {
        BallParams {
            masses: vec![1.0],
            radius: 1.0,
            inertia: Vec3::new(0.9, 1.0, 1.1),
            gravity: 1.0,
            cm_offset: cm,
            rails: vec![],
            accels: vec![],
            force: ExternalForce::zero(),
        }
    }

    #[test]
    fn frame_at_identity() {
        let p = hoop_ball();
        let fv = frame_vars(&p, 0.0, &cm_above_start()).unwrap();
        assert_eq!(fv.vertical, Vec3::z());
        assert_eq!(fv.force_body, Vec3::zeros());
        let mut bad = cm_above_start();
        bad[6] = 1.01;
        assert!(frame_vars(&p, 0.0, &bad).is_err());
    }

    #[test]
    fn frame_of_planar_attitude() {
        let p = bare_ball(Vec3::zeros());
        let phi: f64 = 1.1;
        let x = pack_state(&[], &[], [(phi / 2.0).cos(), 0.0, -(phi / 2.0).sin(), 0.0], Vec3::zeros(), [0.0; 2]);
        let fv = frame_vars(&p, 0.0, &x).unwrap();
        assert!((fv.vertical - Vec3::new(phi.sin(), 0.0, phi.cos())).norm() < 1e-15);
    }

    #[test]
    fn resting_ball_with_low_cm_has_no_acceleration() {
        let p = bare_ball(Vec3::new(0.0, 0.0, -0.2));
        let x = pack_state(&[], &[], [1.0, 0.0, 0.0, 0.0], Vec3::zeros(), [0.0; 2]);
        assert_eq!(omega_dot(&p, 0.0, &x, &[]).unwrap(), Vec3::zeros());
        let mut dx = vec![1.0; 9];
        rhs_ode(&p, 0.0, &x, &[], &mut dx).unwrap();
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    // Reference value from an independent 40-digit evaluation of the
    // angular acceleration at the start of the three-mass manoeuvre.
    #[test]
    fn tilted_hoops_initial_acceleration() {
        let p = hoop_ball();
        let w = omega_dot(&p, 0.0, &cm_above_start(), &[1.0, 1.0, 1.0]).unwrap();
        let expect = Vec3::new(-0.139434596387407665573551, 0.2120539895129429839015751, -0.3647981258010383580528374);
        assert!((w - expect).norm() < 1e-14, "{w:?}");
        let mut dx = vec![0.0; 15];
        rhs_ode(&p, 0.0, &cm_above_start(), &[1.0, 1.0, 1.0], &mut dx).unwrap();
        assert_eq!(&dx[13..15], &[0.0, 0.0]);
    }

    #[test]
    fn spin_about_vertical_does_not_translate() {
        let p = hoop_ball();
        let mut x = cm_above_start();
        x[12] = 3.0;
        let mut dx = vec![0.0; 15];
        rhs_ode(&p, 0.0, &x, &[0.0; 3], &mut dx).unwrap();
        assert_eq!(&dx[13..15], &[0.0, 0.0]);
    }

    #[test]
    fn tilted_hoops_energy_and_cm() {
        let p = hoop_ball();
        let x = cm_above_start();
        let e = energy(&p, 0.0, &x);
        assert_eq!(e.kinetic, 0.0);
        assert!((e.potential - 0.683213320430877671257068).abs() < 1e-14);
        let mp = mass_positions(&p, &x);
        assert!(mp.cm_body.x.abs() < 1e-5 && mp.cm_body.y.abs() < 1e-5);
        assert!(mp.cm_body.z > 0.17);
        assert_eq!(mp.body, mp.spatial);
        assert_eq!(mp.body.len(), 4);
    }

    #[test]
    fn dae_residual_rows() {
        let p = hoop_ball();
        let x = cm_above_start();
        let u = [1.0, 1.0, 1.0];
        let mut f = vec![0.0; 15];
        rhs_ode(&p, 0.0, &x, &u, &mut f).unwrap();
        let r = dae_residual(&p, 0.0, &x, &f, &u).unwrap();
        assert_eq!(r.len(), 15);
        assert!(r.iter().all(|v| v.abs() <= 1e-12));
        let mut xs = x.clone();
        xs[6] = 1.01f64.sqrt();
        rhs_ode(&p, 0.0, &xs, &u, &mut f).unwrap();
        let r = dae_residual(&p, 0.0, &xs, &f, &u).unwrap();
        assert!((r[6] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn jacobian_structure() {
        let p = hoop_ball();
        let mut x = cm_above_start();
        x[3] = 0.3;
        x[10] = 0.2;
        let j = jacobian(&p, 0.5, &x, 1e-6).unwrap();
        for r in 0..3 {
            for c in 0..15 {
                let expect = if c == r + 3 { 1.0 } else { 0.0 };
                assert!((j[(r, c)] - expect).abs() < 1e-9);
                assert_eq!(j[(r + 3, c)], 0.0);
            }
        }
        let coarse = jacobian(&p, 0.5, &x, 1e-5).unwrap();
        let scale = j.amax();
        assert!((&j - &coarse).amax() <= 1e-4 * scale);
    }

    #[test]
    fn projection_normalizes() {
        let p = hoop_ball();
        let mut x = cm_above_start();
        x[6] = 1.1;
        assert!(BallSystem { params: &p }.project(&mut x));
        check_versor(&quat(x[6], x[7], x[8], x[9]), 1e-15).unwrap();
    }

    #[test]
    fn validation() {
        let mut p = hoop_ball();
        p.masses.pop();
        assert!(p.validate().is_err());
        let mut p = hoop_ball();
        p.inertia.x = 0.0;
        assert!(p.validate().is_err());
        assert!(hoop_ball().validate().is_ok());
    }

    fn random_state() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-6.0..6.0f64, 3),
            proptest::collection::vec(-3.0..3.0f64, 3),
            proptest::collection::vec(-1.0..1.0f64, 4),
            proptest::collection::vec(-3.0..3.0f64, 3),
            proptest::collection::vec(-2.0..2.0f64, 3),
        )
            .prop_filter("nonzero q", |(_, _, q, _, _)| q.iter().map(|v| v * v).sum::<f64>() > 1e-2)
            .prop_map(|(th, thd, q, om, u)| {
                let nq = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let x = pack_state(
                    &th,
                    &thd,
                    [q[0] / nq, q[1] / nq, q[2] / nq, q[3] / nq],
                    Vec3::new(om[0], om[1], om[2]),
                    [0.3, -0.1],
                );
                (x, u)
            })
    }

    proptest! {
        #[test]
        fn mass_matrix_negative_definite((x, _u) in random_state()) {
            let p = hoop_ball();
            let l = p.layout();
            let gam = frame_vars(&p, 0.0, &x).unwrap().vertical;
            let mut a = -Mat3::from_diagonal(&p.inertia);
            for i in 0..=3 {
                let th = if i == 0 { 0.0 } else { x[i - 1] };
                a += hat_sq(&(gam * p.radius + p.rail_point(i, th).pos)) * p.masses[i];
            }
            let _ = l;
            prop_assert!((a - a.transpose()).norm() == 0.0);
            prop_assert!(a.symmetric_eigenvalues().max() < 0.0);
        }

        #[test]
        fn frozen_masses_match_lumped_body((x, _u) in random_state()) {
            let p = hoop_ball();
            let mut xf = x.clone();
            xf[3..6].fill(0.0);
            let w = omega_dot(&p, 0.0, &xf, &[0.0; 3]).unwrap();
            let (m, cm, inertia) = lump_frozen(&p, &xf[0..3]);
            let fv = frame_vars(&p, 0.0, &xf).unwrap();
            let om = Vec3::new(xf[10], xf[11], xf[12]);
            let ws = static_ball_omega_dot(m, &cm, &inertia, p.radius, p.gravity, &fv.vertical, &fv.force_body, &om).unwrap();
            prop_assert!((w - ws).amax() < 1e-12, "{:?} vs {:?}", w, ws);
        }

        #[test]
        fn ode_and_dae_agree((x, u) in random_state()) {
            let p = hoop_ball();
            let mut f = vec![0.0; 15];
            rhs_ode(&p, 0.0, &x, &u, &mut f).unwrap();
            let r = dae_residual(&p, 0.0, &x, &f, &u).unwrap();
            prop_assert!(r.iter().all(|v| v.abs() <= 1e-12));
        }
    }
}
