//! Relative pose estimation between two plenoptic cameras and rectification
//! of their light fields onto a common two-plane parameterization.
//!
//! * [`geometry`]: LF-points, intrinsics, poses, rays and error metrics.
//! * [`pose`]: constrained linear pose solver and manifold refinement.
//! * [`rectify`]: ray warping and the rectifying rotation.
//! * [`resample`]: aligned sub-aperture planning, quadrilinear resampling, EPIs.
//! * [`sim`]: synthetic cameras, checkerboard correspondences, rendered light fields.
//! * [`sweep`]: Monte-Carlo benchmark sweeps.
//! * [`io`]: file formats.

pub mod error;
pub mod geometry;
pub mod io;
pub mod pose;
pub mod rectify;
pub mod resample;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use geometry::{
    angular_error_rotation, angular_error_translation, backproject_lfpoint, project_to_lfpoint,
    LFIntrinsics, LFPoint, Ray4D, RelativePose, ScenePoint3D,
};
pub use pose::{estimate_pose, CorrespondenceSet, PoseEstimate};
pub use rectify::{build_rectified_setup, rectifying_rotation, warp_ray, CameraId, RectifiedSetup};
