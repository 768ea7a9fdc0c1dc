//! Geometry checks on rectified light fields: scan-line alignment of tracked
//! corners and straightness of EPI traces.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::features::{level_crossings, locate_corner, nearest};
use super::render::{TexturedPlane, Texture};
use crate::error::{Error, Result};
use crate::rectify::RectifiedSetup;
use crate::resample::{extract_epi, SampledLF, SpatialMapping};

/// Common-frame depth of the plane facing the common frame squarely that
/// passes `distance` mm in front of the left camera along its optical axis.
pub fn common_depth(setup: &RectifiedSetup, distance: f64) -> Result<f64> {
    let e3z = setup.r_rect[(2, 2)];
    if e3z.abs() < 1e-6 {
        return Err(Error::InvalidConfig("common frame is perpendicular to the left optical axis".into()));
    }
    Ok(distance / e3z)
}

/// Plane at common-frame depth `z` whose texture coordinates are the
/// common-frame `x` and `y`, expressed in the left camera's frame.
pub fn plane_facing_common(setup: &RectifiedSetup, z: f64, texture: Texture) -> TexturedPlane {
    let rt = setup.r_rect.transpose();
    let col = |i: usize| -> [f64; 3] { rt.column(i).into_owned().into() };
    let origin: [f64; 3] = (rt * Vector3::new(0.0, 0.0, z)).into();
    TexturedPlane { origin, axis_x: col(0), axis_y: col(1), half_extent: None, texture }
}

/// Checkerboard corners `(i a, j a, z)` with `|i|, |j| <= n` in the common frame.
pub fn checker_corners(square_mm: f64, n: i32, z: f64) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            out.push(Vector3::new(i as f64 * square_mm, j as f64 * square_mm, z));
        }
    }
    out
}

/// Pixel `(col, row)` of a common-frame point in sub-aperture `(ap_row, ap_col)`.
pub fn project_common(lf: &SampledLF, ap_row: usize, ap_col: usize, p: &Vector3<f64>) -> (f64, f64) {
    let s = lf.s_positions[ap_col];
    let t = lf.t_positions[ap_row];
    let u = (p.x - s) / p.z;
    let v = (p.y - t) / p.z;
    (lf.mapping.col(u, s), lf.mapping.row(v, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerTrack {
    pub ap_row: usize,
    pub corner: usize,
    /// Sub-apertures in the row where the corner was found.
    pub count: usize,
    /// max - min of the detected row coordinates, px.
    pub spread_px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanlineReport {
    pub tracks: Vec<CornerTrack>,
    /// Largest spread over all tracks, px (0 when nothing was tracked).
    pub max_spread_px: f64,
    /// Largest distance between a detection and its predicted position, px.
    pub max_prediction_error_px: f64,
}

/// Detects each corner (given in the common frame) in every sub-aperture
/// and measures how much its vertical image coordinate varies along each
/// sub-aperture row. Corners seen in fewer than `min_count` sub-apertures of
/// a row are skipped.
pub fn scanline_spread(lf: &SampledLF, corners: &[Vector3<f64>], min_count: usize) -> ScanlineReport {
    let mut tracks = Vec::new();
    let mut max_pred: f64 = 0.0;
    for ap_row in 0..lf.n_t() {
        for (k, p) in corners.iter().enumerate() {
            let mut rows = Vec::new();
            for ap_col in 0..lf.n_s() {
                let (c, r) = project_common(lf, ap_row, ap_col, p);
                if let Some((x, y)) = locate_corner(lf.image(ap_row, ap_col), c, r, 3, 1.5) {
                    max_pred = max_pred.max((x - c).hypot(y - r));
                    rows.push(y);
                }
            }
            if rows.len() >= min_count.max(1) {
                let lo = rows.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                tracks.push(CornerTrack { ap_row, corner: k, count: rows.len(), spread_px: hi - lo });
            }
        }
    }
    let max_spread_px = tracks.iter().map(|t| t.spread_px).fold(0.0, f64::max);
    ScanlineReport { tracks, max_spread_px, max_prediction_error_px: max_pred }
}

/// EPI slope `d col / d s` (px per mm) of a point at common-frame depth `z`.
pub fn analytic_epi_slope(mapping: &SpatialMapping, z: f64) -> f64 {
    (-1.0 / z - mapping.u_per_s) / mapping.du
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiTrace {
    /// Common-frame x of the tracked edge, mm.
    pub edge_x: f64,
    /// `(s, col)` samples along the trace.
    pub points: Vec<(f64, f64)>,
    /// Least-squares `d col / d s`, px per mm.
    pub slope: f64,
    /// Largest perpendicular distance of a sample from the fitted line, px
    /// (s measured in sub-aperture pitches).
    pub max_residual_px: f64,
}

/// Follows vertical edges at common-frame `x = edge_x[k]` on a plane at
/// depth `z` through the EPI of sub-aperture row `row_t` and pixel row
/// `row_v`, and fits a line to each trace. Traces with fewer than
/// `min_points` samples are dropped.
pub fn epi_traces(
    lf: &SampledLF,
    row_t: usize,
    row_v: usize,
    z: f64,
    edge_x: &[f64],
    min_points: usize,
) -> Result<Vec<EpiTrace>> {
    let epi = extract_epi(lf, row_t, row_v)?;
    let pitch = if lf.n_s() > 1 { lf.pitch_s().abs() } else { 1.0 };
    let pitch = if pitch > 0.0 { pitch } else { 1.0 };
    let crossings: Vec<Vec<f64>> = (0..epi.height).map(|i| level_crossings(epi.row(i), 0.5)).collect();
    let mut out = Vec::new();
    for &x in edge_x {
        let points: Vec<(f64, f64)> = lf
            .s_positions
            .iter()
            .zip(&crossings)
            .filter_map(|(&s, cr)| {
                let predicted = lf.mapping.col((x - s) / z, s);
                nearest(cr, predicted, 1.0).map(|c| (s, c))
            })
            .collect();
        if points.len() < min_points.max(2) {
            continue;
        }
        let (slope, max_residual_px) = fit_line(&points, pitch);
        out.push(EpiTrace { edge_x: x, points, slope, max_residual_px });
    }
    Ok(out)
}

/// Total-least-squares line through `(s / pitch, col)`; returns the slope in
/// px per mm and the largest perpendicular residual.
fn fit_line(points: &[(f64, f64)], pitch: f64) -> (f64, f64) {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), &(s, c)| (a + s / pitch, b + c));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(s, c) in points {
        let (dx, dy) = (s / pitch - mx, c - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // direction of largest spread
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (dx, dy) = (theta.cos(), theta.sin());
    let max_residual = points
        .iter()
        .map(|&(s, c)| ((s / pitch - mx) * dy - (c - my) * dx).abs())
        .fold(0.0, f64::max);
    (dy / dx / pitch, max_residual)
}
