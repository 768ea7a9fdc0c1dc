use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::CorrespondenceSet;
use crate::geometry::backproject_lfpoint;

/// Plane-fit RMS, relative to the scene diameter, below which the scene is
/// treated as planar.
pub const COPLANAR_RELATIVE_RMS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub coplanar: bool,
    /// Unit normal of the best-fit plane `n . X = d` in the camera-1 frame.
    pub plane_normal: [f64; 3],
    /// mm
    pub plane_distance: f64,
    /// mm
    pub residual_rms: f64,
    /// Largest distance between two reconstructed points, mm.
    pub scene_diameter: f64,
}

/// Reconstructs the camera-1 points and fits a total-least-squares plane.
pub fn detect_degeneracy(corr: &CorrespondenceSet) -> DegeneracyReport {
    let (k, _) = corr.intrinsics();
    let points: Vec<Vector3<f64>> = corr
        .pairs()
        .iter()
        .filter_map(|(p, _)| backproject_lfpoint(p, k).ok())
        .map(|p| p.to_vector())
        .collect();

    if points.len() < 4 {
        return DegeneracyReport {
            coplanar: true,
            plane_normal: [0.0, 0.0, 1.0],
            plane_distance: 0.0,
            residual_rms: 0.0,
            scene_diameter: 0.0,
        };
    }

    let n = points.len();
    let centroid = points.iter().sum::<Vector3<f64>>() / n as f64;
    let centered = DMatrix::from_fn(n, 3, |i, j| points[i][j] - centroid[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let imin = svd.singular_values.imin();
    let normal = Vector3::new(v_t[(imin, 0)], v_t[(imin, 1)], v_t[(imin, 2)]).normalize();
    let residual_rms = svd.singular_values[imin] / (n as f64).sqrt();

    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max((points[i] - points[j]).norm());
        }
    }

    DegeneracyReport {
        coplanar: diameter == 0.0 || residual_rms / diameter < COPLANAR_RELATIVE_RMS,
        plane_normal: [normal[0], normal[1], normal[2]],
        plane_distance: normal.dot(&centroid),
        residual_rms,
        scene_diameter: diameter,
    }
}
