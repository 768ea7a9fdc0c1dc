use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LFPoint;

/// Per-axis similarity that conditions a set of LF-points:
/// `normalized_k = scale_k * original_k + offset_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub scale: [f64; 3],
    pub offset: [f64; 3],
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self { scale: [1.0; 3], offset: [0.0; 3] }
    }

    /// The 4x4 matrix `N` with `diag(v1, v2, v3, 1)` and offsets in the last column.
    pub fn matrix(&self) -> Matrix4<f64> {
        let [v1, v2, v3] = self.scale;
        let [x1, x2, x3] = self.offset;
        Matrix4::new(
            v1, 0.0, 0.0, x1, //
            0.0, v2, 0.0, x2, //
            0.0, 0.0, v3, x3, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    pub fn inverse_matrix(&self) -> Matrix4<f64> {
        let [v1, v2, v3] = self.scale;
        let [x1, x2, x3] = self.offset;
        Matrix4::new(
            1.0 / v1, 0.0, 0.0, -x1 / v1, //
            0.0, 1.0 / v2, 0.0, -x2 / v2, //
            0.0, 0.0, 1.0 / v3, -x3 / v3, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    pub fn apply(&self, p: &LFPoint) -> LFPoint {
        LFPoint::new(
            self.scale[0] * p.u_c + self.offset[0],
            self.scale[1] * p.v_c + self.offset[1],
            self.scale[2] * p.lambda + self.offset[2],
        )
    }
}

/// Moves the centroid of `points` to the origin and scales each coordinate
/// axis to unit root-mean-square.
pub fn normalize_points(points: &[LFPoint]) -> Result<(Vec<LFPoint>, NormalizationTransform)> {
    if points.len() < 2 {
        return Err(Error::InvalidCorrespondences(format!(
            "normalization needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let coords = |p: &LFPoint| [p.u_c, p.v_c, p.lambda];

    let mut mean = [0.0; 3];
    for p in points {
        for (m, c) in mean.iter_mut().zip(coords(p)) {
            *m += c;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut ms = [0.0; 3];
    for p in points {
        for ((acc, c), m) in ms.iter_mut().zip(coords(p)).zip(mean) {
            *acc += (c - m) * (c - m);
        }
    }

    let mut scale = [0.0; 3];
    let mut offset = [0.0; 3];
    for axis in 0..3 {
        let rms = (ms[axis] / n).sqrt();
        if !(rms > 1e-12 * (1.0 + mean[axis].abs())) {
            return Err(Error::DegenerateSpread { axis });
        }
        scale[axis] = 1.0 / rms;
        offset[axis] = -scale[axis] * mean[axis];
    }
    let transform = NormalizationTransform { scale, offset };
    let normalized = points.iter().map(|p| transform.apply(p)).collect();
    Ok((normalized, transform))
}
