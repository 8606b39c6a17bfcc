//! Geometric and numeric primitives: 3-vectors, rotations on SO(3), and
//! small dense least-squares solves.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

/// 3-vector in SI units (meaning depends on context: m, m/s, rad/s, ...).
pub type Vec3 = Vector3<f64>;
/// Dense 3x3 matrix.
pub type Mat3 = Matrix3<f64>;
/// General dense matrix used for stacked least-squares systems and the
/// configuration matrix.
pub type DMat = DMatrix<f64>;
/// General dense column vector.
pub type DVec = DVector<f64>;

/// Orthonormality tolerance for a valid rotation matrix.
pub const SO3_TOL: f64 = 1e-9;

/// Default condition-number threshold for `solve_least_squares`.
pub const DEFAULT_COND_LIMIT: f64 = 1e8;

/// Skew-symmetric matrix of `v`, so that `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation matrix mapping body frame to inertial frame.
///
/// Wraps a 3x3 matrix and maintains the SO(3) invariants
/// (`R^T R = I` and `det R = +1` within [`SO3_TOL`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    /// Wraps `m`, checking the SO(3) invariants.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let drift = (m.transpose() * m - Mat3::identity()).norm();
        let det = m.determinant();
        if drift > SO3_TOL || (det - 1.0).abs() > SO3_TOL || !m.iter().all(|x| x.is_finite()) {
            return Err(Error::Degenerate { sigma_min: det });
        }
        Ok(RotationMatrix(m))
    }

    /// Wraps `m` without validation. Caller guarantees `m` is in SO(3).
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        RotationMatrix(m)
    }

    /// Rotation by `angle` rad about the Z axis.
    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Rotation by `angle` rad about the Y axis.
    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Rotation by `angle` rad about the X axis.
    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Exponential map: rotation by the axis-angle vector `w` (Rodrigues).
    pub fn exp(w: &Vec3) -> Self {
        let theta = w.norm();
        if theta < 1e-12 {
            // second-order series keeps the result orthogonal to machine precision
            let k = skew(w);
            return RotationMatrix::renormalize(Mat3::identity() + k + 0.5 * (k * k));
        }
        let axis = w / theta;
        let k = skew(&axis);
        let m = Mat3::identity() + theta.sin() * k + (1.0 - theta.cos()) * (k * k);
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    /// First body axis expressed in the inertial frame.
    pub fn i_hat(&self) -> Vec3 {
        self.0.column(0).into()
    }

    /// Second body axis expressed in the inertial frame.
    pub fn j_hat(&self) -> Vec3 {
        self.0.column(1).into()
    }

    /// Third body axis (thrust direction) expressed in the inertial frame.
    pub fn k_hat(&self) -> Vec3 {
        self.0.column(2).into()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn inverse_rotate(&self, v: &Vec3) -> Vec3 {
        self.0.transpose() * v
    }

    /// Frobenius distance from orthonormality, `|R^T R - I|_F`.
    pub fn orthonormality_drift(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).norm()
    }

    fn renormalize(m: Mat3) -> Self {
        orthonormalize(&m).expect("near-rotation input")
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// Advances `r` by one step of the body-rate kinematics `Rdot = R w_x`,
/// using the exponential map so the result stays on SO(3).
pub fn integrate_rotation(r: &RotationMatrix, omega: &Vec3, dt: f64) -> RotationMatrix {
    let next = RotationMatrix(r.0 * RotationMatrix::exp(&(omega * dt)).0);
    if next.orthonormality_drift() > 1e-12 {
        RotationMatrix::renormalize(next.0)
    } else {
        next
    }
}

/// Z-Y-X Euler yaw of `r`, in (-pi, pi].
///
/// Fails with `SingularAttitude` at the +-90 deg pitch singularity.
pub fn yaw_of(r: &RotationMatrix) -> Result<f64> {
    let m = r.matrix();
    if m[(2, 0)].abs() > 1.0 - 1e-9 {
        return Err(Error::SingularAttitude);
    }
    Ok(m[(1, 0)].atan2(m[(0, 0)]))
}

/// Minimum-norm least-squares solution of `A x = b` via SVD.
///
/// Rejects systems whose condition number exceeds `cond_limit`
/// (use [`DEFAULT_COND_LIMIT`] unless a caller has better information).
pub fn solve_least_squares(a: &DMat, b: &DVec, cond_limit: f64) -> Result<DVec> {
    assert!(a.nrows() >= a.ncols(), "need m >= n, got {}x{}", a.nrows(), a.ncols());
    assert_eq!(a.nrows(), b.len());
    let sv = a.clone().svd(false, false).singular_values;
    let condition = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    if condition > cond_limit {
        return Err(Error::RankDeficient { condition });
    }
    // thin QR is noticeably more accurate than nalgebra's SVD solve when
    // singular values cluster
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * b;
    qr.r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { condition })
}

/// Nearest rotation to `m` in the Frobenius norm (polar factor of the SVD,
/// with the sign corrected so that det = +1).
pub fn orthonormalize(m: &Mat3) -> Result<RotationMatrix> {
    let svd = m.svd(true, true);
    let sigma_min = svd.singular_values.min();
    if sigma_min < 1e-12 {
        return Err(Error::Degenerate { sigma_min });
    }
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // flip the axis of the smallest singular value
        let mut u = u;
        let j = svd.singular_values.imin();
        for i in 0..3 {
            u[(i, j)] = -u[(i, j)];
        }
        r = u * vt;
    }
    Ok(RotationMatrix(r))
}
