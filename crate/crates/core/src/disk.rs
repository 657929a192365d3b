//! Planar rolling disk: the ball restricted to motion in the e1-e3 plane.
//!
//! State layout for `n` moving masses (length `2n + 2`):
//! `[theta (n), theta_dot (n), phi, phi_dot]`. `phi` is the unwrapped angle
//! from e1 to the body axis E1, counterclockwise when viewed along -e2.

use crate::ball::{kink_times, pack_state, BallParams, ExternalForce};
use crate::error::{Result, SimError};
use crate::integrate::OdeSystem;
use crate::rails::{AccelProfile, Rail, RailPoint};
use crate::so3::Vec3;

#[derive(Debug, Clone)]
pub struct DiskParams {
    pub masses: Vec<f64>,
    pub radius: f64,
    /// Moment of inertia about the axis normal to the plane.
    pub inertia: f64,
    pub gravity: f64,
    /// Center of mass of the static structure (y component must be zero).
    pub cm_offset: Vec3,
    pub rails: Vec<Rail>,
    pub accels: Vec<AccelProfile>,
    /// Only the e1 component enters the planar dynamics.
    pub force: ExternalForce,
}

impl DiskParams {
    pub fn n(&self) -> usize {
        self.rails.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() + 2
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
        if !(self.inertia > 0.0) || !self.inertia.is_finite() {
            return bad("inertia must be positive".into());
        }
        if !(self.gravity >= 0.0) || !self.gravity.is_finite() {
            return bad("gravity must be non-negative".into());
        }
        if self.cm_offset.y != 0.0 || !self.cm_offset.iter().all(|c| c.is_finite()) {
            return bad("disk cm_offset must lie in the e1-e3 plane".into());
        }
        if let Some(k) = self.rails.iter().position(|r| !r.is_planar()) {
            return bad(format!("rail {} does not lie in the e1-e3 plane", k + 1));
        }
        let f = self.force.at(0.0);
        if let ExternalForce::Table(c) = &self.force {
            if c[1].breakpoints.iter().any(|(_, v)| *v != 0.0) {
                return bad("disk external force must lie in the e1-e3 plane".into());
            }
        } else if f.y != 0.0 {
            return bad("disk external force must lie in the e1-e3 plane".into());
        }
        Ok(())
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

    /// The same mechanical system expressed as a ball with equal principal
    /// moments.
    pub fn to_ball(&self) -> BallParams {
        BallParams {
            masses: self.masses.clone(),
            radius: self.radius,
            inertia: Vec3::repeat(self.inertia),
            gravity: self.gravity,
            cm_offset: self.cm_offset,
            rails: self.rails.clone(),
            accels: self.accels.clone(),
            force: self.force.clone(),
        }
    }
}

/// Ball state equivalent to a disk state with the center at `z`.
pub fn embed_state(p: &DiskParams, x: &[f64], z: f64) -> Vec<f64> {
    let n = p.n();
    let (phi, phid) = (x[2 * n], x[2 * n + 1]);
    let (s, c) = (0.5 * phi).sin_cos();
    pack_state(&x[..n], &x[n..2 * n], [c, 0.0, -s, 0.0], Vec3::new(0.0, -phid, 0.0), [z, 0.0])
}

/// Planar angle encoded by a quaternion of the form `(cos(phi/2), 0, -sin(phi/2), 0)`,
/// unwrapped to lie within pi of `near`.
pub fn angle_from_quat(q: &[f64], near: f64) -> f64 {
    let raw = -2.0 * q[2].atan2(q[0]);
    let tau = std::f64::consts::TAU;
    raw + tau * ((near - raw) / tau).round()
}

/// The per-mass term of the planar equation of motion.
#[allow(clippy::too_many_arguments)]
pub fn k_term(p: &DiskParams, i: usize, theta: f64, theta_dot: f64, theta_ddot: f64, phi: f64, phi_dot: f64) -> f64 {
    let rp = p.rail_point(i, theta);
    let (z1, z3) = (rp.pos.x, rp.pos.z);
    let (d1, d3) = (rp.d1.x, rp.d1.z);
    let (dd1, dd3) = (rp.d2.x, rp.d2.z);
    let r = p.radius;
    let (s, c) = phi.sin_cos();
    (p.gravity + r * phi_dot * phi_dot) * (z3 * s - z1 * c)
        + (r * c + z3) * (-2.0 * phi_dot * theta_dot * d3 + theta_dot * theta_dot * dd1 + theta_ddot * d1)
        - (r * s + z1) * (2.0 * phi_dot * theta_dot * d1 + theta_dot * theta_dot * dd3 + theta_ddot * d3)
}

/// Moment of inertia about the contact point: the disk's own moment plus
/// each mass times its squared distance from the contact point.
pub fn contact_inertia(p: &DiskParams, x: &[f64]) -> f64 {
    let n = p.n();
    let r = p.radius;
    let (s, c) = x[2 * n].sin_cos();
    (0..=n).fold(p.inertia, |acc, i| {
        let rp = p.rail_point(i, if i == 0 { 0.0 } else { x[i - 1] });
        acc + p.masses[i] * ((r * s + rp.pos.x).powi(2) + (r * c + rp.pos.z).powi(2))
    })
}

/// Angular acceleration of the disk.
pub fn phi_ddot(p: &DiskParams, t: f64, x: &[f64], u: &[f64]) -> f64 {
    let n = p.n();
    let (phi, phid) = (x[2 * n], x[2 * n + 1]);
    let mut num = -p.radius * p.force.at(t).x;
    for i in 0..=n {
        let (th, thd, thdd) = if i == 0 { (0.0, 0.0, 0.0) } else { (x[i - 1], x[n + i - 1], u[i - 1]) };
        num += p.masses[i] * k_term(p, i, th, thd, thdd, phi, phid);
    }
    num / contact_inertia(p, x)
}

/// Torque balance for a single mass on a circle about the center of a disk
/// whose own center of mass is at its center.
pub fn newton_oracle(p: &DiskParams, t: f64, x: &[f64], theta_ddot: f64) -> Result<f64> {
    let r1 = single_mass_radius(p)?;
    let (m0, m1) = (p.masses[0], p.masses[1]);
    let (th, thd, phi, phid) = (x[0], x[1], x[2], x[3]);
    let r = p.radius;
    let a = phi + th;
    let num = r * p.force.at(t).x
        + m1 * r1 * (a.cos() * (r * (phid + thd).powi(2) + p.gravity) + (r1 + r * a.sin()) * theta_ddot);
    let den = p.inertia + (m0 + m1) * r * r + m1 * r1 * (r1 + 2.0 * r * a.sin());
    Ok(-num / den)
}

fn single_mass_radius(p: &DiskParams) -> Result<f64> {
    let pre = |m: &str| Err(SimError::Precondition(m.to_string()));
    if p.n() != 1 || p.masses.len() != 2 {
        return pre("the torque-balance reference needs exactly one moving mass");
    }
    if p.cm_offset != Vec3::zeros() {
        return pre("the torque-balance reference needs the static center of mass at the center");
    }
    match &p.rails[0] {
        Rail::Circle(c) => {
            let e1 = (c.basis.column(0) - Vec3::x()).amax();
            let e3 = (c.basis.column(2) - Vec3::z()).amax();
            if c.center != Vec3::zeros() || e1 > 1e-15 || e3 > 1e-15 {
                return pre("the rail must be a circle about the center, starting along e1");
            }
            if c.radius >= p.radius {
                return pre("the rail must lie inside the disk");
            }
            Ok(c.radius)
        }
        _ => pre("the moving mass must ride a circular rail"),
    }
}

pub fn is_newton_eligible(p: &DiskParams) -> bool {
    single_mass_radius(p).is_ok()
}

pub fn rhs_disk(p: &DiskParams, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let n = p.n();
    dx[..n].copy_from_slice(&x[n..2 * n]);
    dx[n..2 * n].copy_from_slice(u);
    dx[2 * n] = x[2 * n + 1];
    dx[2 * n + 1] = phi_ddot(p, t, x, u);
}

/// Horizontal position of the center; rolling with positive `phi_dot`
/// moves the disk towards -e1.
pub fn gc_position(z_start: f64, phi_start: f64, phi: f64, radius: f64) -> f64 {
    z_start - radius * (phi - phi_start)
}

pub fn energy(p: &DiskParams, x: &[f64]) -> crate::ball::Energy {
    let n = p.n();
    let (phi, phid) = (x[2 * n], x[2 * n + 1]);
    let (s, c) = phi.sin_cos();
    let r = p.radius;
    let mut kinetic = 0.5 * p.inertia * phid * phid;
    let mut potential = 0.0;
    for i in 0..=n {
        let (th, thd) = if i == 0 { (0.0, 0.0) } else { (x[i - 1], x[n + i - 1]) };
        let rp = p.rail_point(i, th);
        let (s1, s3) = (r * s + rp.pos.x, r * c + rp.pos.z);
        let y1 = -phid * s3 + thd * rp.d1.x;
        let y3 = phid * s1 + thd * rp.d1.z;
        kinetic += 0.5 * p.masses[i] * (y1 * y1 + y3 * y3);
        potential += p.gravity * p.masses[i] * (rp.pos.x * s + rp.pos.z * c);
    }
    crate::ball::Energy { kinetic, potential }
}

/// In-plane (e1, e3) mass positions about the center: body axes, spatial
/// axes, and the system center of mass in both.
pub struct PlanarPositions {
    pub body: Vec<[f64; 2]>,
    pub spatial: Vec<[f64; 2]>,
    pub cm_body: [f64; 2],
    pub cm_spatial: [f64; 2],
}

pub fn mass_positions(p: &DiskParams, x: &[f64]) -> PlanarPositions {
    let n = p.n();
    let (s, c) = x[2 * n].sin_cos();
    let rot = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
    let body: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let pos = p.rail_point(i, if i == 0 { 0.0 } else { x[i - 1] }).pos;
            [pos.x, pos.z]
        })
        .collect();
    let spatial = body.iter().map(|b| rot(*b)).collect();
    let m = p.total_mass();
    let mut cm = [0.0, 0.0];
    for (b, mi) in body.iter().zip(&p.masses) {
        cm[0] += mi * b[0] / m;
        cm[1] += mi * b[1] / m;
    }
    PlanarPositions { body, spatial, cm_body: cm, cm_spatial: rot(cm) }
}

pub struct DiskSystem<'a> {
    pub params: &'a DiskParams,
}

impl OdeSystem for DiskSystem<'_> {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let u = self.params.controls(t);
        rhs_disk(self.params, t, x, &u, dx);
        Ok(())
    }

    fn breakpoints(&self) -> Vec<f64> {
        kink_times(&self.params.accels, &self.params.force)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::ball;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn four_mass_disk() -> DiskParams {
        let radii = [0.9, 19.0 / 30.0, 11.0 / 30.0, 0.1];
        DiskParams {
            masses: vec![1.0; 5],
            radius: 1.0,
            inertia: 1.0,
            gravity: 1.0,
            cm_offset: Vec3::zeros(),
            rails: radii.iter().map(|r| Rail::planar_circle(*r, 0.0, 0.0).unwrap()).collect(),
            accels: (1..=4).map(|i| AccelProfile::short_pulse(if i % 2 == 0 { 1.0 } else { -1.0 })).collect(),
            force: ExternalForce::zero(),
        }
    }

    fn single_mass_disk() -> DiskParams {
        DiskParams {
            masses: vec![1.0, 1.0],
            radius: 1.0,
            inertia: 1.0,
            gravity: 1.0,
            cm_offset: Vec3::zeros(),
            rails: vec![Rail::planar_circle(0.9, 0.0, 0.0).unwrap()],
            accels: vec![AccelProfile::short_pulse(1.0)],
            force: ExternalForce::zero(),
        }
    }

    fn start(n: usize) -> Vec<f64> {
        let mut x = vec![-FRAC_PI_2; n];
        x.extend(vec![0.0; n + 2]);
        x
    }

    #[test]
    fn static_center_mass_has_no_term() {
        let p = four_mass_disk();
        for (phi, phid) in [(0.0, 0.0), (0.4, -2.0), (3.0, 5.0)] {
            assert_eq!(k_term(&p, 0, 0.0, 0.0, 0.0, phi, phid), 0.0);
        }
    }

    #[test]
    fn k_terms_at_start() {
        let p = four_mass_disk();
        let radii = [0.9, 19.0 / 30.0, 11.0 / 30.0, 0.1];
        let expect = [-0.09, 0.2322222222222222222, -0.2322222222222222222, 0.09];
        for i in 1..=4 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let k = k_term(&p, i, -FRAC_PI_2, 0.0, sign, 0.0, 0.0);
            assert!((k - (1.0 - radii[i - 1]) * radii[i - 1] * sign).abs() < 1e-15);
            assert!((k - expect[i - 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn gravity_arm_only_when_masses_rest() {
        let p = four_mass_disk();
        let (th, phi) = (0.8, -0.3);
        let rp = p.rails[1].eval(th);
        let k = k_term(&p, 2, th, 0.0, 0.0, phi, 0.0);
        assert!((k - (rp.pos.z * phi.sin() - rp.pos.x * phi.cos())).abs() < 1e-15);
    }

    #[test]
    fn symmetric_start_has_zero_acceleration() {
        let p = four_mass_disk();
        let x = start(4);
        let u = p.controls(0.0);
        assert!(phi_ddot(&p, 0.0, &x, &u).abs() < 1e-14);
        let mut dx = vec![9.0; 10];
        rhs_disk(&p, 0.0, &x, &u, &mut dx);
        assert_eq!(&dx[..4], &[0.0; 4]);
        assert_eq!(&dx[4..8], &u[..]);
        assert_eq!(dx[8], 0.0);
    }

    #[test]
    fn single_mass_example() {
        let p = single_mass_disk();
        let x = start(1);
        let a = phi_ddot(&p, 0.0, &x, &[1.0]);
        let b = newton_oracle(&p, 0.0, &x, 1.0).unwrap();
        let expect = 0.04477611940298507462686567;
        assert!((a - expect).abs() < 1e-15);
        assert!((b - expect).abs() < 1e-15);
        assert!((a - 0.09 / 2.01).abs() < 1e-15);
    }

    #[test]
    fn newton_oracle_vertical_mass() {
        let p = single_mass_disk();
        for phi_plus_theta in [FRAC_PI_2, -FRAC_PI_2] {
            let x = [phi_plus_theta - 0.3, 0.0, 0.3, 0.0];
            assert!(newton_oracle(&p, 0.0, &x, 0.0).unwrap().abs() < 1e-16);
        }
    }

    #[test]
    fn newton_oracle_preconditions() {
        assert!(newton_oracle(&four_mass_disk(), 0.0, &start(4), 0.0).is_err());
        let mut p = single_mass_disk();
        p.cm_offset = Vec3::new(0.0, 0.0, -0.1);
        assert!(matches!(newton_oracle(&p, 0.0, &start(1), 0.0), Err(SimError::Precondition(_))));
        let mut p = single_mass_disk();
        p.rails[0] = Rail::planar_circle(0.5, 0.1, 0.0).unwrap();
        assert!(!is_newton_eligible(&p));
    }

    #[test]
    fn hanging_masses_are_in_equilibrium() {
        let p = four_mass_disk();
        let x = start(4);
        assert!(phi_ddot(&p, 0.0, &x, &[0.0; 4]).abs() < 1e-16);
    }

    #[test]
    fn gc_examples() {
        assert_eq!(gc_position(1.5, 0.2, 0.2, 3.0), 1.5);
        assert!((gc_position(0.0, 0.0, TAU, 1.0) + TAU).abs() < 1e-15);
    }

    #[test]
    fn start_positions() {
        let p = four_mass_disk();
        let pos = mass_positions(&p, &start(4));
        assert!(pos.cm_body[0].abs() < 1e-15);
        assert!((pos.cm_body[1] + 2.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn embedding_matches_ball_frame() {
        let p = four_mass_disk();
        let mut x = start(4);
        x[8] = 2.3;
        x[9] = -0.7;
        let bx = embed_state(&p, &x, 0.0);
        let bp = p.to_ball();
        let fv = ball::frame_vars(&bp, 0.0, &bx).unwrap();
        assert!((fv.vertical - Vec3::new(2.3f64.sin(), 0.0, 2.3f64.cos())).norm() < 1e-15);
        assert!((angle_from_quat(&bx[8..12], 2.3) - 2.3).abs() < 1e-15);
        assert!((angle_from_quat(&bx[8..12], 2.3 + TAU) - 2.3 - TAU).abs() < 1e-14);
        let be = ball::energy(&bp, 0.0, &bx);
        let de = energy(&p, &x);
        assert!((be.total() - de.total()).abs() < 1e-14);
    }

    #[test]
    fn wrap_handles_half_turns() {
        let phi = PI + 0.1;
        let q = [(phi / 2.0).cos(), 0.0, -(phi / 2.0).sin(), 0.0];
        assert!((angle_from_quat(&q, PI) - phi).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn embedded_ball_matches_planar_acceleration(
            th in proptest::collection::vec(-7.0..7.0f64, 4),
            thd in proptest::collection::vec(-3.0..3.0f64, 4),
            u in proptest::collection::vec(-2.0..2.0f64, 4),
            phi in -7.0..7.0f64,
            phid in -4.0..4.0f64,
        ) {
            let p = four_mass_disk();
            let mut x = th.clone();
            x.extend(&thd);
            x.push(phi);
            x.push(phid);
            let a = phi_ddot(&p, 0.0, &x, &u);
            let bx = embed_state(&p, &x, 0.0);
            let w = ball::omega_dot(&p.to_ball(), 0.0, &bx, &u).unwrap();
            prop_assert!(w.x.abs() < 1e-12 && w.z.abs() < 1e-12);
            prop_assert!((w.y + a).abs() < 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn contact_inertia_is_distance_weighted(th in -7.0..7.0f64, phi in -7.0..7.0f64) {
            let p = single_mass_disk();
            let x = [th, 0.0, phi, 0.0];
            let j = contact_inertia(&p, &x);
            prop_assert!(j >= p.inertia + p.masses[0] * p.radius.powi(2));
            // Distance from the contact point to the mass, by the law of cosines
            // with the angle between the rail position and the upward vertical.
            let (r, r1) = (p.radius, 0.9);
            let d2 = r * r + r1 * r1 + 2.0 * r * r1 * (th + phi - FRAC_PI_2).cos();
            prop_assert!((j - (p.inertia + r * r + d2)).abs() < 1e-12);
        }
    }
}
