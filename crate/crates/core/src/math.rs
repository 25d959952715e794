//! Small fixed-size linear algebra used throughout the model.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = SVector<f64, 6>;
pub type Vec12 = SVector<f64, 12>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat12 = SMatrix<f64, 12, 12>;

/// Below this |cos(pitch)| the 3-2-1 rate basis is treated as singular.
pub const GIMBAL_TOLERANCE: f64 = 1e-6;

/// Condition number above which a linear solve is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Pivot ratio that triggers an exact condition computation.
const PIVOT_RATIO_CHECK: f64 = 1e6;

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

pub fn rot_x(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-to-world rotation for yaw-pitch-roll angles, `Rz(yaw) Ry(pitch) Rx(roll)`.
pub fn rot321(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    rot_z(yaw) * rot_y(pitch) * rot_x(roll)
}

/// `rot321(yaw, pitch, roll) - I` without the cancellation of forming the
/// rotation first; small angles keep full relative precision.
pub fn rot321_minus_identity(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    let (x, y) = (rot_x(roll), rot_y(pitch));
    elementary_minus_identity(yaw, 2) * y * x + elementary_minus_identity(pitch, 1) * x + elementary_minus_identity(roll, 0)
}

// Rotation about a coordinate axis minus the identity, with `cos - 1`
// evaluated as `-2 sin^2(a/2)`.
fn elementary_minus_identity(angle: f64, axis: usize) -> Mat3 {
    let s = angle.sin();
    let h = (0.5 * angle).sin();
    let v = -2.0 * h * h;
    let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut m = Mat3::zeros();
    m[(i, i)] = v;
    m[(j, j)] = v;
    m[(j, i)] = s;
    m[(i, j)] = -s;
    m
}

/// `Rz(a) Rx(b) Rz(c)`, used to place link frames.
pub fn rot313(a: f64, b: f64, c: f64) -> Mat3 {
    rot_z(a) * rot_x(b) * rot_z(c)
}

/// Maps 3-2-1 angle rates `(yaw, pitch, roll)` to body angular velocity.
pub fn euler_basis(pitch: f64, roll: f64) -> Result<Mat3> {
    let (st, ct) = pitch.sin_cos();
    if ct.abs() < GIMBAL_TOLERANCE {
        return Err(Error::GimbalLock { pitch });
    }
    let (sp, cp) = roll.sin_cos();
    Ok(Mat3::new(-st, 0.0, 1.0, ct * sp, cp, 0.0, ct * cp, -sp, 0.0))
}

/// Solves `a x = b` by LU with partial pivoting.
///
/// A cheap pivot-ratio estimate screens every call; if it looks suspicious
/// the exact 1-norm condition number is computed and systems above
/// [`MAX_CONDITION`] are rejected.
pub fn solve_linear(a: &Mat12, b: &Vec12) -> Result<Vec12> {
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..12 {
        let p = u[(i, i)].abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > 0.0) {
        return Err(Error::SingularSystem { condition: f64::INFINITY });
    }
    if hi / lo > PIVOT_RATIO_CHECK {
        let condition = match lu.try_inverse() {
            Some(inv) => norm1(a) * norm1(&inv),
            None => f64::INFINITY,
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularSystem { condition });
        }
    }
    lu.solve(b).ok_or(Error::SingularSystem { condition: f64::INFINITY })
}

/// Maximum absolute column sum.
pub fn norm1<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Magnitude in decibels.
pub fn db(x: f64) -> f64 {
    20.0 * x.log10()
}
