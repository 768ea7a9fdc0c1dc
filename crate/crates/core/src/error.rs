use thiserror::Error;

/// Errors produced by the geometry, solver, rectification and resampling code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point has non-positive depth Z = {0}")]
    NonPositiveDepth(f64),
    #[error("disparity {lambda} sits on the pole lambda = -K1 (K1 = {k1})")]
    DegenerateDisparity { lambda: f64, k1: f64 },
    #[error("vector norm below 1e-12")]
    ZeroVector,
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("matrix is not a proper rotation: {0}")]
    InvalidRotation(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid correspondence set: {0}")]
    InvalidCorrespondences(String),
    #[error("coordinate axis {axis} has zero spread; cannot normalize")]
    DegenerateSpread { axis: usize },
    #[error("null space of the constrained system is ambiguous (singular values {smallest:e} / {second:e})")]
    RankDeficient { smallest: f64, second: f64 },
    #[error("scene points are coplanar: fitted plane n.X = d with n = [{:.4}, {:.4}, {:.4}], d = {distance:.3} mm (rms {rms:.3e} mm)", normal[0], normal[1], normal[2])]
    CoplanarDegeneracy {
        normal: [f64; 3],
        distance: f64,
        rms: f64,
    },
    #[error("matrix is singular (smallest singular value {0:e})")]
    SingularInput(f64),
    #[error("translation system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("refinement produced a non-finite cost")]
    NumericalFailure,

    #[error("ray is parallel to the target parameterization planes")]
    ParallelRay,
    #[error("warped ray segment has zero depth extent")]
    DegenerateSegment,
    #[error("baseline is zero; cannot build a rectifying rotation")]
    ZeroBaseline,
    #[error("translation is parallel to the principal-ray sum; second rectifying axis is undefined")]
    CollinearConstruction,
    #[error("no target row intersects both warped aperture hulls: {0}")]
    NoOverlap(String),
    #[error("ray falls outside the sampled aperture")]
    OutOfAperture,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid light field: {0}")]
    InvalidLightField(String),

    #[error("point is behind camera {camera} (Z = {z})")]
    BehindCamera { camera: u8, z: f64 },
    #[error("need observations from at least two distinct sub-apertures")]
    InsufficientObservations,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
