//! Small fixed-size algebra on R^3, so(3) and the quaternions.
//!
//! Quaternions are scalar-first: `Quat::new(q0, q1, q2, q3)`.

use nalgebra::{Matrix3, Quaternion, Vector3};

use crate::error::{Result, SimError};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = Quaternion<f64>;

pub const VERSOR_TOL: f64 = 1e-9;
pub const ANTISYM_TOL: f64 = 1e-12;

pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. The input is antisymmetrized before extraction.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let sym = (m + m.transpose()) * 0.5;
    let worst = sym.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(worst <= ANTISYM_TOL) {
        return Err(SimError::Validation(format!("matrix is not antisymmetric (symmetric part {worst:.3e})")));
    }
    let a = (m - m.transpose()) * 0.5;
    Ok(Vec3::new(a[(2, 1)], a[(0, 2)], a[(1, 0)]))
}

/// `hat(v) * hat(v)`, written out as `v v^T - |v|^2 I`.
pub fn hat_sq(v: &Vec3) -> Mat3 {
    let (x, y, z) = (v.x, v.y, v.z);
    Mat3::new(-(y * y + z * z), x * y, x * z, x * y, -(x * x + z * z), y * z, x * z, y * z, -(x * x + y * y))
}

pub fn quat(q0: f64, q1: f64, q2: f64, q3: f64) -> Quat {
    Quat::new(q0, q1, q2, q3)
}

pub fn quat_identity() -> Quat {
    Quat::new(1.0, 0.0, 0.0, 0.0)
}

pub fn quat_mul(p: &Quat, q: &Quat) -> Quat {
    let (p0, pv) = (p.w, p.imag());
    let (q0, qv) = (q.w, q.imag());
    let s = p0 * q0 - pv.dot(&qv);
    let v = qv * p0 + pv * q0 + pv.cross(&qv);
    Quat::new(s, v.x, v.y, v.z)
}

pub fn quat_conj(q: &Quat) -> Quat {
    q.conjugate()
}

pub fn quat_inv(q: &Quat) -> Result<Quat> {
    let n2 = q.norm_squared();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(SimError::Domain("inverse of a zero quaternion".into()));
    }
    Ok(q.conjugate() / n2)
}

pub fn sharp(v: &Vec3) -> Quat {
    Quat::new(0.0, v.x, v.y, v.z)
}

pub fn flat(q: &Quat) -> Vec3 {
    q.imag()
}

pub fn check_versor(q: &Quat, tol: f64) -> Result<()> {
    let dev = (q.norm_squared() - 1.0).abs();
    if !(dev <= tol) {
        return Err(SimError::Validation(format!(
            "quaternion is not unit: |q|^2 - 1 = {:.3e}",
            q.norm_squared() - 1.0
        )));
    }
    Ok(())
}

/// Rotation matrix of a unit quaternion. No normalization is applied.
pub fn rotation_unchecked(q: &Quat) -> Mat3 {
    let (q0, q1, q2, q3) = (q.w, q.i, q.j, q.k);
    Mat3::new(
        1.0 - 2.0 * (q2 * q2 + q3 * q3),
        2.0 * (q1 * q2 - q0 * q3),
        2.0 * (q1 * q3 + q0 * q2),
        2.0 * (q1 * q2 + q0 * q3),
        1.0 - 2.0 * (q1 * q1 + q3 * q3),
        2.0 * (q2 * q3 - q0 * q1),
        2.0 * (q1 * q3 - q0 * q2),
        2.0 * (q2 * q3 + q0 * q1),
        1.0 - 2.0 * (q1 * q1 + q2 * q2),
    )
}

pub fn versor_to_rotation(q: &Quat) -> Result<Mat3> {
    check_versor(q, VERSOR_TOL)?;
    Ok(rotation_unchecked(q))
}

/// `q Y# q^-1`, returned as a vector.
pub fn rotate(q: &Quat, y: &Vec3) -> Result<Vec3> {
    check_versor(q, VERSOR_TOL)?;
    let qi = quat_inv(q)?;
    Ok(flat(&quat_mul(&quat_mul(q, &sharp(y)), &qi)))
}

/// Attitude kinematics `qdot = q Omega# / 2` for body angular velocity.
pub fn quat_kinematics(q: &Quat, omega: &Vec3) -> Quat {
    quat_mul(q, &sharp(omega)) * 0.5
}

pub fn quat_to_array(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

pub fn quat_from_slice(s: &[f64]) -> Quat {
    Quat::new(s[0], s[1], s[2], s[3])
}
