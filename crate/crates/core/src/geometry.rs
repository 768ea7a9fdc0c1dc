//! Value types shared by every stage of the pipeline and the error metrics
//! used to score pose estimates.
//!
//! Units: millimetres for scene and ray coordinates, pixels for image
//! coordinates and disparities, degrees for reported angular errors.

use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROTATION_TOL: f64 = 1e-9;

/// A light-field feature: its position in the central sub-aperture image and
/// the disparity between any two adjacent sub-aperture images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LFPoint {
    pub u_c: f64,
    pub v_c: f64,
    pub lambda: f64,
}

impl LFPoint {
    pub fn new(u_c: f64, v_c: f64, lambda: f64) -> Self {
        Self { u_c, v_c, lambda }
    }

    pub fn is_finite(&self) -> bool {
        self.u_c.is_finite() && self.v_c.is_finite() && self.lambda.is_finite()
    }

    /// `[u_c, v_c, lambda, 1]`.
    pub fn homogeneous(&self) -> Vector4<f64> {
        Vector4::new(self.u_c, self.v_c, self.lambda, 1.0)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u_c, self.v_c, self.lambda)
    }

    /// Divides a homogeneous 4-vector by its last component.
    pub fn from_homogeneous(h: &Vector4<f64>) -> Self {
        Self::new(h[0] / h[3], h[1] / h[3], h[2] / h[3])
    }
}

/// Intrinsics of a calibrated plenoptic camera.
///
/// `k1` is dimensionless and `k2` is in pixel-millimetres so that
/// `lambda = -k1 - k2 / Z` is in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LFIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
}

impl LFIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, k1: f64, k2: f64) -> Result<Self> {
        let k = Self { fx, fy, cx, cy, k1, k2 };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.fx, self.fy, self.cx, self.cy, self.k1, self.k2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidIntrinsics("non-finite parameter".into()));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if self.k2 == 0.0 {
            return Err(Error::InvalidIntrinsics("K2 must be non-zero".into()));
        }
        Ok(())
    }

    /// The 4x4 matrix `H` mapping `[X, Y, Z, 1]` to `Z * [u_c, v_c, lambda, 1]`.
    pub fn matrix_h(&self) -> Matrix4<f64> {
        Matrix4::new(
            self.fx, 0.0, self.cx, 0.0, //
            0.0, self.fy, self.cy, 0.0, //
            0.0, 0.0, -self.k1, -self.k2, //
            0.0, 0.0, 1.0, 0.0,
        )
    }

    /// Closed-form inverse of [`matrix_h`](Self::matrix_h).
    pub fn matrix_h_inverse(&self) -> Matrix4<f64> {
        Matrix4::new(
            1.0 / self.fx, 0.0, 0.0, -self.cx / self.fx, //
            0.0, 1.0 / self.fy, 0.0, -self.cy / self.fy, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0 / self.k2, -self.k1 / self.k2,
        )
    }

    /// Intrinsics of the same camera after all image coordinates (and
    /// disparities) are multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            fx: self.fx * factor,
            fy: self.fy * factor,
            cx: self.cx * factor,
            cy: self.cy * factor,
            k1: self.k1 * factor,
            k2: self.k2 * factor,
        }
    }

    /// Camera 1 of the simulated Lytro-Illum-like pair.
    pub fn table1_camera1() -> Self {
        Self { fx: 572.720, fy: 572.685, cx: 270.916, cy: 188.109, k1: 0.030, k2: 165.298 }
    }

    /// Camera 2 of the simulated Lytro-Illum-like pair.
    pub fn table1_camera2() -> Self {
        Self { fx: 538.374, fy: 538.062, cx: 283.471, cy: 188.709, k1: 0.028, k2: 147.606 }
    }
}

/// Rigid transform between two camera frames: `x_target = R * x_source + T`.
///
/// The pose produced by the solver maps camera-1 coordinates into camera-2
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RelativePose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        check_rotation(&rotation)?;
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("translation"));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Rotation from intrinsic x-y-z Euler angles in degrees,
    /// `R = Rx(a) * Ry(b) * Rz(c)`, and a translation in millimetres.
    pub fn from_euler_xyz_deg(angles: [f64; 3], translation: Vector3<f64>) -> Result<Self> {
        Self::new(euler_xyz_deg(angles), translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// `(R^T, -R^T T)`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    /// `[R T; 0 1]`.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &RelativePose) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }
}

pub(crate) fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rotation"));
    }
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    if ortho > ROTATION_TOL {
        return Err(Error::InvalidRotation(format!("|R^T R - I|_max = {ortho:e}")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > ROTATION_TOL {
        return Err(Error::InvalidRotation(format!("det(R) = {det}")));
    }
    Ok(())
}

/// `Rx(a) * Ry(b) * Rz(c)` with angles in degrees.
pub fn euler_xyz_deg(angles: [f64; 3]) -> Matrix3<f64> {
    let [a, b, c] = angles.map(f64::to_radians);
    let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), a);
    let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), b);
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), c);
    (rx * ry * rz).into_inner()
}

/// A ray in a two-plane parameterization: `(s, t)` on the ST plane and
/// `(u, v)` the offset of its UV-plane intersection (one millimetre ahead)
/// relative to `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray4D {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl Ray4D {
    pub fn new(s: f64, t: f64, u: f64, v: f64) -> Self {
        Self { s, t, u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.t.is_finite() && self.u.is_finite() && self.v.is_finite()
    }

    /// Point where the ray crosses `z = depth`.
    pub fn point_at_depth(&self, depth: f64) -> Vector3<f64> {
        Vector3::new(self.s + depth * self.u, self.t + depth * self.v, depth)
    }
}

/// A 3D point in a camera frame, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenePoint3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScenePoint3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Projects a camera-frame point to its LF-point.
pub fn project_to_lfpoint(p: &ScenePoint3D, k: &LFIntrinsics) -> Result<LFPoint> {
    if p.z <= 0.0 || !p.z.is_finite() {
        return Err(Error::NonPositiveDepth(p.z));
    }
    let z = p.z;
    Ok(LFPoint::new(
        (k.fx * p.x + k.cx * z) / z,
        (k.fy * p.y + k.cy * z) / z,
        (-k.k1 * z - k.k2) / z,
    ))
}

/// Recovers the camera-frame point that produced an LF-point.
pub fn backproject_lfpoint(lp: &LFPoint, k: &LFIntrinsics) -> Result<ScenePoint3D> {
    let denom = lp.lambda + k.k1;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateDisparity { lambda: lp.lambda, k1: k.k1 });
    }
    let z = -k.k2 / denom;
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::NonPositiveDepth(z));
    }
    Ok(ScenePoint3D::new(
        z * (lp.u_c - k.cx) / k.fx,
        z * (lp.v_c - k.cy) / k.fy,
        z,
    ))
}

/// Angle in degrees of the rotation `R_true * R_est^T`.
///
/// Evaluates `acos((trace - 1) / 2)` through `atan2` of the skew part and the
/// cosine, which is the same angle but keeps full precision near zero. The
/// cosine is clamped to `[-1, 1]`.
pub fn angular_error_rotation(r_true: &Matrix3<f64>, r_est: &Matrix3<f64>) -> f64 {
    let m = r_true * r_est.transpose();
    let cos = (0.5 * (m.trace() - 1.0)).clamp(-1.0, 1.0);
    let skew = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    let sin = (0.5 * skew.norm()).min(1.0);
    sin.atan2(cos).to_degrees()
}

/// Angle in degrees between two translation directions.
pub fn angular_error_translation(t_true: &Vector3<f64>, t_est: &Vector3<f64>) -> Result<f64> {
    let (na, nb) = (t_true.norm(), t_est.norm());
    if na < 1e-12 || nb < 1e-12 {
        return Err(Error::ZeroVector);
    }
    let a = t_true / na;
    let b = t_est / nb;
    let cos = a.dot(&b).clamp(-1.0, 1.0);
    let sin = a.cross(&b).norm().min(1.0);
    Ok(sin.atan2(cos).to_degrees())
}
