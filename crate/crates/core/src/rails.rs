//! Body-fixed rails carrying the moving point masses, and the prescribed
//! acceleration profiles that drive them along their rails.

use crate::error::{Result, SimError};
use crate::so3::{Mat3, Vec3};

pub fn spherical_to_cartesian(azimuth: f64, elevation: f64, rho: f64) -> Vec3 {
    Vec3::new(rho * elevation.cos() * azimuth.cos(), rho * elevation.cos() * azimuth.sin(), rho * elevation.sin())
}

/// Right-handed orthonormal basis whose first column is `n`.
///
/// The two tangent vectors come from the branch-free Frisvad construction
/// (Duff et al. 2017); the columns are ordered `[n, t2, -t1]`.
pub fn basis_from_normal(n: &Vec3) -> Result<Mat3> {
    let len = n.norm();
    if !((len - 1.0).abs() <= 1e-9) {
        return Err(SimError::Validation(format!("basis normal must be a unit vector, got |n| = {len}")));
    }
    let sign = 1.0_f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t1 = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let t2 = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    Ok(Mat3::from_columns(&[*n, t2, -t1]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailPoint {
    pub pos: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleRail {
    pub radius: f64,
    pub center: Vec3,
    pub basis: Mat3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rail {
    StaticPoint(Vec3),
    Circle(CircleRail),
}

impl Rail {
    /// Circle of `radius` about `center`. `axis` holds spherical coordinates
    /// (azimuth, elevation, length) of the direction the mass points to at
    /// parameter zero.
    pub fn circle(radius: f64, center: Vec3, axis: [f64; 3]) -> Result<Rail> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SimError::Validation(format!("rail radius must be positive, got {radius}")));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(SimError::Validation("rail center must be finite".into()));
        }
        let n = spherical_to_cartesian(axis[0], axis[1], axis[2]);
        let basis = basis_from_normal(&n)?;
        Ok(Rail::Circle(CircleRail { radius, center, basis }))
    }

    /// Circle in the e1-e3 plane, parameter zero along +e1.
    pub fn planar_circle(radius: f64, center_x: f64, center_z: f64) -> Result<Rail> {
        Rail::circle(radius, Vec3::new(center_x, 0.0, center_z), [0.0, 0.0, 1.0])
    }

    pub fn eval(&self, theta: f64) -> RailPoint {
        match self {
            Rail::StaticPoint(p) => RailPoint { pos: *p, d1: Vec3::zeros(), d2: Vec3::zeros() },
            Rail::Circle(c) => {
                let (s, co) = theta.sin_cos();
                let u = c.basis * Vec3::new(co, 0.0, s) * c.radius;
                let du = c.basis * Vec3::new(-s, 0.0, co) * c.radius;
                RailPoint { pos: c.center + u, d1: du, d2: -u }
            }
        }
    }

    /// True when every point of the rail lies in the e1-e3 plane.
    pub fn is_planar(&self) -> bool {
        match self {
            Rail::StaticPoint(p) => p.y == 0.0,
            Rail::Circle(c) => c.center.y == 0.0 && c.basis[(1, 0)].abs() < 1e-15 && c.basis[(1, 2)].abs() < 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelProfile {
    pub breakpoints: Vec<(f64, f64)>,
    pub sign: f64,
}

impl AccelProfile {
    pub fn new(breakpoints: Vec<(f64, f64)>, sign: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(SimError::Validation("acceleration profile needs at least one breakpoint".into()));
        }
        if breakpoints.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) || !sign.is_finite() {
            return Err(SimError::Validation("acceleration profile must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(SimError::Validation("acceleration profile times must be strictly increasing".into()));
        }
        Ok(AccelProfile { breakpoints, sign })
    }

    pub fn zero() -> Self {
        AccelProfile { breakpoints: vec![(0.0, 0.0)], sign: 1.0 }
    }

    /// Unit acceleration for 0.1, a linear ramp to zero by 0.2, then zero until 20.
    pub fn short_pulse(sign: f64) -> Self {
        AccelProfile { breakpoints: vec![(0.0, 1.0), (0.1, 1.0), (0.2, 0.0), (20.0, 0.0)], sign }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.iter().map(|(t, _)| *t)
    }

    /// Piecewise-linear value; clamped to the end values outside the table.
    pub fn eval(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let (t0, v0) = bp[0];
        let (tn, vn) = bp[bp.len() - 1];
        let v = if t <= t0 {
            v0
        } else if t >= tn {
            vn
        } else {
            let k = bp.partition_point(|&(tb, _)| tb <= t);
            let (ta, va) = bp[k - 1];
            let (tb, vb) = bp[k];
            va + (vb - va) * (t - ta) / (tb - ta)
        };
        self.sign * v
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn static_point() {
        let r = Rail::StaticPoint(Vec3::new(0.0, 0.0, -0.05));
        let p = r.eval(1.234);
        assert_eq!(p.pos, Vec3::new(0.0, 0.0, -0.05));
        assert_eq!(p.d1, Vec3::zeros());
        assert_eq!(p.d2, Vec3::zeros());
    }

    #[test]
    fn planar_circle_bottom() {
        let r = Rail::planar_circle(0.9, 0.0, 0.0).unwrap();
        let p = r.eval(-FRAC_PI_2);
        assert!(close(&p.pos, &Vec3::new(0.0, 0.0, -0.9), 1e-15));
        assert!(close(&p.d1, &Vec3::new(0.9, 0.0, 0.0), 1e-15));
        assert!(close(&p.d2, &Vec3::new(0.0, 0.0, 0.9), 1e-15));
        assert!(r.is_planar());
    }

    #[test]
    fn spherical_examples() {
        assert_eq!(spherical_to_cartesian(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0));
        assert!(close(&spherical_to_cartesian(FRAC_PI_2, 0.0, 1.0), &Vec3::y(), 1e-16));
        let v = spherical_to_cartesian(FRAC_PI_4, FRAC_PI_4, 1.0);
        assert!(close(&v, &Vec3::new(0.5, 0.5, 2f64.sqrt() / 2.0), 1e-15));
    }

    #[test]
    fn basis_examples() {
        for n in [Vec3::z(), Vec3::x(), -Vec3::z(), Vec3::y()] {
            let b = basis_from_normal(&n).unwrap();
            assert!((b.transpose() * b - Mat3::identity()).norm() < 1e-15);
            assert!((b.determinant() - 1.0).abs() < 1e-15);
            assert_eq!(b.column(0), n);
        }
        assert_eq!(basis_from_normal(&Vec3::x()).unwrap(), Mat3::identity());
        assert!(basis_from_normal(&Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    // Mass positions of the three-rail ball at its initial configuration,
    // checked against an independent 40-digit evaluation.
    #[test]
    fn ball_rails_at_start() {
        let r1 = Rail::circle(0.95, Vec3::zeros(), [0.0, 0.0, 1.0]).unwrap();
        let r2 = Rail::circle(0.9, Vec3::zeros(), [FRAC_PI_2, 0.0, 1.0]).unwrap();
        let r3 = Rail::circle(0.85, Vec3::zeros(), [FRAC_PI_4, FRAC_PI_4, 1.0]).unwrap();
        let p1 = r1.eval(0.0).pos;
        let p2 = r2.eval(2.0369).pos;
        let p3 = r3.eval(0.7044).pos;
        assert!(close(&p1, &Vec3::new(0.95, 0.0, 0.0), 1e-15));
        assert!(close(&p2, &Vec3::new(-0.80399349818743666167, -0.40446811354212865988, 0.0), 1e-14));
        assert!(close(&p3, &Vec3::new(-0.14598002827255663971, 0.40446020581544319369, 0.73321332043087767126), 1e-14));
        // The system center of mass sits (to the four printed digits of the
        // initial angles) on the vertical axis above the center.
        let cm = p1 + p2 + p3 + Vec3::new(0.0, 0.0, -0.05);
        assert!(cm.x.abs() < 1e-4 && cm.y.abs() < 1e-4 && cm.z > 0.6);
    }

    #[test]
    fn pulse_values() {
        let p = AccelProfile::short_pulse(-1.0);
        assert_eq!(p.eval(0.05), -1.0);
        assert!((p.eval(0.15) + 0.5).abs() < 1e-15);
        assert_eq!(p.eval(10.0), 0.0);
        assert_eq!(AccelProfile::short_pulse(1.0).eval(0.15).abs(), p.eval(0.15).abs());
        assert_eq!(p.eval(-1.0), -1.0);
        assert_eq!(p.eval(25.0), 0.0);
    }

    #[test]
    fn profile_validation() {
        assert!(AccelProfile::new(vec![], 1.0).is_err());
        assert!(AccelProfile::new(vec![(0.0, 1.0), (0.0, 2.0)], 1.0).is_err());
        assert!(AccelProfile::new(vec![(0.0, 1.0), (1.0, f64::NAN)], 1.0).is_err());
        assert!(Rail::circle(0.0, Vec3::zeros(), [0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn profile_continuous_at_breakpoints() {
        let p = AccelProfile::short_pulse(1.0);
        for &(t, _) in &p.breakpoints {
            assert!((p.eval(t + 1e-8) - p.eval(t)).abs() < 1e-6);
            assert!((p.eval(t - 1e-8) - p.eval(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn basis_is_deterministic() {
        let n = Vec3::new(0.3, -0.4, 0.5).normalize();
        let a = basis_from_normal(&n).unwrap();
        let b = basis_from_normal(&n).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    fn rail_strategy() -> impl Strategy<Value = Rail> {
        (0.05..2.0f64, (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), (-3.2..3.2f64, -1.5..1.5f64))
            .prop_map(|(rad, (x, y, z), (az, el))| Rail::circle(rad, Vec3::new(x, y, z), [az, el, 1.0]).unwrap())
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(rail in rail_strategy(), th in -10.0..10.0f64) {
            let h = 1e-4;
            let p = rail.eval(th);
            let (a, b) = (rail.eval(th + h), rail.eval(th - h));
            prop_assert!(close(&((a.pos - b.pos) / (2.0 * h)), &p.d1, 1e-6));
            prop_assert!(close(&((a.d1 - b.d1) / (2.0 * h)), &p.d2, 1e-6));
        }

        #[test]
        fn circle_stays_on_radius(rail in rail_strategy(), th in -10.0..10.0f64) {
            if let Rail::Circle(c) = &rail {
                prop_assert!(((rail.eval(th).pos - c.center).norm() - c.radius).abs() < 1e-12);
            }
        }

        #[test]
        fn basis_orthonormal(az in -3.2..3.2f64, el in -1.57..1.57f64) {
            let n = spherical_to_cartesian(az, el, 1.0);
            let b = basis_from_normal(&n).unwrap();
            prop_assert!((b.transpose() * b - Mat3::identity()).norm() < 1e-12);
            prop_assert!((b.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
