//! Reference rigid-body systems with known conserved quantities: the free
//! rigid body, the heavy top and Suslov's problem.

use crate::ball::normalize_quat;
use crate::error::{Result, SimError};
use crate::integrate::OdeSystem;
use crate::so3::{quat_from_slice, quat_kinematics, rotation_unchecked, Vec3};

fn check_inertia(i: &Vec3) -> Result<()> {
    if i.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(SimError::Validation("principal moments of inertia must be positive".into()));
    }
    Ok(())
}

fn v3(x: &[f64]) -> Vec3 {
    Vec3::new(x[0], x[1], x[2])
}

/// Euler's equations for a torque-free body.
pub fn free_rigid_body_rhs(inertia: &Vec3, omega: &Vec3) -> Vec3 {
    inertia.component_mul(omega).cross(omega).component_div(inertia)
}

/// Torque-free body carrying its attitude: state `[Omega (3), q (4)]`.
#[derive(Debug, Clone)]
pub struct RigidBody {
    pub inertia: Vec3,
}

impl RigidBody {
    pub fn new(inertia: Vec3) -> Result<Self> {
        check_inertia(&inertia)?;
        Ok(RigidBody { inertia })
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let om = v3(x);
        0.5 * om.dot(&self.inertia.component_mul(&om))
    }

    pub fn momentum_body(&self, x: &[f64]) -> Vec3 {
        self.inertia.component_mul(&v3(x))
    }

    /// Angular momentum in the spatial frame, constant along solutions.
    pub fn momentum_spatial(&self, x: &[f64]) -> Vec3 {
        let q = quat_from_slice(&x[3..7]);
        rotation_unchecked(&(q / q.norm())) * self.momentum_body(x)
    }
}

impl OdeSystem for RigidBody {
    fn dim(&self) -> usize {
        7
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let om = v3(x);
        dx[..3].copy_from_slice(free_rigid_body_rhs(&self.inertia, &om).as_slice());
        let qd = quat_kinematics(&quat_from_slice(&x[3..7]), &om);
        dx[3..7].copy_from_slice(&[qd.w, qd.i, qd.j, qd.k]);
        Ok(())
    }

    fn project(&self, x: &mut [f64]) -> bool {
        normalize_quat(&mut x[3..7])
    }
}

/// Heavy top about a fixed support: state `[Omega (3), Gamma (3)]`.
#[derive(Debug, Clone)]
pub struct HeavyTop {
    pub inertia: Vec3,
    pub mass: f64,
    pub gravity: f64,
    /// Support-to-center-of-mass vector in body axes.
    pub cm: Vec3,
}

impl HeavyTop {
    pub fn new(inertia: Vec3, mass: f64, gravity: f64, cm: Vec3) -> Result<Self> {
        check_inertia(&inertia)?;
        if !(mass > 0.0) || !(gravity >= 0.0) || !cm.iter().all(|c| c.is_finite()) {
            return Err(SimError::Validation("heavy top needs mass > 0, gravity >= 0, finite cm".into()));
        }
        Ok(HeavyTop { inertia, mass, gravity, cm })
    }

    pub fn rates(&self, omega: &Vec3, gamma: &Vec3) -> (Vec3, Vec3) {
        let m = self.inertia.component_mul(omega);
        let torque = gamma.cross(&self.cm) * (self.mass * self.gravity);
        ((m.cross(omega) + torque).component_div(&self.inertia), gamma.cross(omega))
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let om = v3(x);
        0.5 * om.dot(&self.inertia.component_mul(&om)) + self.mass * self.gravity * self.cm.dot(&v3(&x[3..]))
    }

    pub fn vertical_momentum(&self, x: &[f64]) -> f64 {
        self.inertia.component_mul(&v3(x)).dot(&v3(&x[3..]))
    }

    /// Momentum about the symmetry axis E3.
    pub fn axial_momentum(&self, x: &[f64]) -> f64 {
        self.inertia.z * x[2]
    }
}

impl OdeSystem for HeavyTop {
    fn dim(&self) -> usize {
        6
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let (a, b) = self.rates(&v3(x), &v3(&x[3..]));
        dx[..3].copy_from_slice(a.as_slice());
        dx[3..].copy_from_slice(b.as_slice());
        Ok(())
    }
}

/// Direction of the body-frame constraint vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintAxis {
    Constant(Vec3),
    /// Great-circle interpolation from `from` to `to` over `[t0, t1]`,
    /// held constant outside. The arc fraction follows `3s^2 - 2s^3` so the
    /// rate of change is continuous.
    Slerp {
        from: Vec3,
        to: Vec3,
        t0: f64,
        t1: f64,
    },
}

impl ConstraintAxis {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::Validation(m.to_string()));
        match self {
            ConstraintAxis::Constant(v) => {
                if !(v.norm() > 0.0) || !v.iter().all(|c| c.is_finite()) {
                    return bad("constraint vector must be nonzero");
                }
            }
            ConstraintAxis::Slerp { from, to, t0, t1 } => {
                if !((from.norm() - 1.0).abs() < 1e-9 && (to.norm() - 1.0).abs() < 1e-9) {
                    return bad("slerp end points must be unit vectors");
                }
                if !(t1 > t0) {
                    return bad("slerp needs t1 > t0");
                }
                let angle = from.angle(to);
                if from != to && !(angle.sin().abs() > 1e-9) {
                    return bad("slerp end points must not be antipodal");
                }
            }
        }
        Ok(())
    }

    /// Value and time derivative.
    pub fn at(&self, t: f64) -> (Vec3, Vec3) {
        match self {
            ConstraintAxis::Constant(v) => (*v, Vec3::zeros()),
            ConstraintAxis::Slerp { from, to, t0, t1 } => {
                if from == to {
                    return (*from, Vec3::zeros());
                }
                let span = t1 - t0;
                let tau = ((t - t0) / span).clamp(0.0, 1.0);
                let s = tau * tau * (3.0 - 2.0 * tau);
                let ds = 6.0 * tau * (1.0 - tau) / span;
                let th = from.angle(to);
                let st = th.sin();
                let xi = (from * ((1.0 - s) * th).sin() + to * (s * th).sin()) / st;
                let dxi = (-from * ((1.0 - s) * th).cos() + to * (s * th).cos()) * (th / st * ds);
                (xi, dxi)
            }
        }
    }
}

/// Rigid body with the nonholonomic constraint `<Omega, xi(t)> = 0`.
/// State `[Omega (3)]`.
#[derive(Debug, Clone)]
pub struct Suslov {
    pub inertia: Vec3,
    pub axis: ConstraintAxis,
}

pub const SUSLOV_CONSISTENCY_TOL: f64 = 1e-9;

impl Suslov {
    pub fn new(inertia: Vec3, axis: ConstraintAxis) -> Result<Self> {
        check_inertia(&inertia)?;
        axis.validate()?;
        Ok(Suslov { inertia, axis })
    }

    pub fn check_initial(&self, t: f64, omega: &Vec3) -> Result<()> {
        let (xi, _) = self.axis.at(t);
        let c = omega.dot(&xi);
        if !(c.abs() <= SUSLOV_CONSISTENCY_TOL) {
            return Err(SimError::Precondition(format!(
                "initial angular velocity violates the constraint: <Omega, xi> = {c:.3e}"
            )));
        }
        Ok(())
    }

    /// Angular acceleration and the constraint multiplier.
    pub fn rates(&self, t: f64, omega: &Vec3) -> (Vec3, f64) {
        let (xi, dxi) = self.axis.at(t);
        let m = self.inertia.component_mul(omega);
        let free = m.cross(omega);
        let ixi = xi.component_div(&self.inertia);
        let lambda = -(omega.dot(&dxi) + free.dot(&ixi)) / xi.dot(&ixi);
        ((free + xi * lambda).component_div(&self.inertia), lambda)
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let om = v3(x);
        0.5 * om.dot(&self.inertia.component_mul(&om))
    }

    pub fn constraint(&self, t: f64, x: &[f64]) -> f64 {
        v3(x).dot(&self.axis.at(t).0)
    }
}

impl OdeSystem for Suslov {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        dx.copy_from_slice(self.rates(t, &v3(x)).0.as_slice());
        Ok(())
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.axis {
            ConstraintAxis::Constant(_) => vec![],
            ConstraintAxis::Slerp { t0, t1, .. } => vec![*t0, *t1],
        }
    }
}
