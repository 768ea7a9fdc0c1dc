//! Ray warping between two-plane parameterizations and the rectifying
//! rotation that puts both cameras' central sub-apertures on one horizontal
//! line of a common parameterization.
//!
//! A parameterization has its ST plane at `z = 0` and its UV plane at
//! `z = 1` mm of its own frame. Warping with a pose `(R, T)` re-expresses a
//! ray given in a source frame in the frame `x' = R x + T`.
//!
//! The rectified setup is built from the pose of the right camera in the
//! left camera's frame (`x_left = R x_right + T`). The solver's output maps
//! camera 1 into camera 2, so with camera 1 on the left use
//! [`RectifiedSetup::from_camera1_to_camera2`].

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ray4D, RelativePose};

/// Rays whose warped direction is closer than this to the target planes are
/// rejected.
pub const PARALLEL_TOL: f64 = 1e-12;
const MIN_BASELINE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraId {
    Left,
    Right,
}

/// Closed-form warp of a ray into the frame `x' = R x + T`.
pub fn warp_ray(r: &Ray4D, pose: &RelativePose) -> Result<Ray4D> {
    let m = pose.rotation();
    let t = pose.translation();
    let denom = m[(2, 2)] + m[(2, 0)] * r.u + m[(2, 1)] * r.v;
    if !(denom.abs() > PARALLEL_TOL) {
        return Err(Error::ParallelRay);
    }
    let z1 = t[2] + m[(2, 0)] * r.s + m[(2, 1)] * r.t;
    let num_u = m[(0, 2)] + m[(0, 0)] * r.u + m[(0, 1)] * r.v;
    let num_v = m[(1, 2)] + m[(1, 0)] * r.u + m[(1, 1)] * r.v;
    let u = num_u / denom;
    let v = num_v / denom;
    let s = t[0] + m[(0, 0)] * r.s + m[(0, 1)] * r.t - z1 * u;
    let tt = t[1] + m[(1, 0)] * r.s + m[(1, 1)] * r.t - z1 * v;
    let out = Ray4D::new(s, tt, u, v);
    if !out.is_finite() {
        return Err(Error::DegenerateSegment);
    }
    Ok(out)
}

/// Rotation whose first row is the baseline direction and whose second row
/// is orthogonal to both the baseline and the sum of the two principal rays.
///
/// `pose` maps right-camera coordinates into the left camera's frame.
pub fn rectifying_rotation(pose: &RelativePose) -> Result<Matrix3<f64>> {
    let t = pose.translation();
    let r = pose.rotation();
    let norm = t.norm();
    if !(norm > MIN_BASELINE) {
        return Err(Error::ZeroBaseline);
    }
    let e1 = t / norm;
    let e2 = Vector3::new(
        -r[(1, 2)] * t[2] + t[1] * (r[(2, 2)] + 1.0),
        r[(0, 2)] * t[2] - t[0] * (r[(2, 2)] + 1.0),
        -r[(0, 2)] * t[1] + r[(1, 2)] * t[0],
    );
    let e2_norm = e2.norm();
    if !(e2_norm > MIN_BASELINE) {
        return Err(Error::CollinearConstruction);
    }
    let e2 = e2 / e2_norm;
    let e3 = e1.cross(&e2);
    Ok(Matrix3::from_rows(&[e1.transpose(), e2.transpose(), e3.transpose()]))
}

/// Transforms from each camera's parameterization into the common one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectifiedSetup {
    pub r_rect: Matrix3<f64>,
    pub r_l: Matrix3<f64>,
    pub r_r: Matrix3<f64>,
    pub t_l: Vector3<f64>,
    pub t_r: Vector3<f64>,
    /// mm
    pub baseline: f64,
}

/// `pose` maps right-camera coordinates into the left camera's frame.
pub fn build_rectified_setup(pose: &RelativePose) -> Result<RectifiedSetup> {
    let r_rect = rectifying_rotation(pose)?;
    Ok(RectifiedSetup {
        r_rect,
        r_l: r_rect,
        r_r: r_rect * pose.rotation(),
        t_l: Vector3::zeros(),
        t_r: r_rect * pose.translation(),
        baseline: pose.translation().norm(),
    })
}

impl RectifiedSetup {
    /// Setup for camera 1 on the left and camera 2 on the right, given the
    /// solver's camera-1-to-camera-2 pose.
    pub fn from_camera1_to_camera2(pose: &RelativePose) -> Result<Self> {
        build_rectified_setup(&pose.inverse())
    }

    /// Transform from `which` camera's frame into the common frame.
    pub fn to_common(&self, which: CameraId) -> RelativePose {
        let (r, t) = match which {
            CameraId::Left => (self.r_l, self.t_l),
            CameraId::Right => (self.r_r, self.t_r),
        };
        // products of rotations; re-orthonormalize only if round-off drifted
        RelativePose::new(r, t).unwrap_or_else(|_| {
            let r = crate::pose::project_to_so3(&r).unwrap_or(r);
            RelativePose::new(r, t).expect("rectifying transform is a rotation")
        })
    }

    pub fn from_common(&self, which: CameraId) -> RelativePose {
        self.to_common(which).inverse()
    }
}

/// Warps a ray of `which` camera into the common parameterization.
pub fn warp_lf_to_common(r: &Ray4D, which: CameraId, setup: &RectifiedSetup) -> Result<Ray4D> {
    warp_ray(r, &setup.to_common(which))
}

/// Inverse of [`warp_lf_to_common`].
pub fn warp_common_to_lf(r: &Ray4D, which: CameraId, setup: &RectifiedSetup) -> Result<Ray4D> {
    warp_ray(r, &setup.from_common(which))
}
