//! Sampled light fields, planning of the aligned sub-aperture grid in the
//! common parameterization, quadrilinear resampling and EPI extraction.
//!
//! Pixels that cannot be synthesized carry [`MASKED`] (NaN).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Ray4D;
use crate::rectify::{warp_common_to_lf, warp_lf_to_common, CameraId, RectifiedSetup};

/// Sentinel value of masked pixels.
pub const MASKED: f64 = f64::NAN;

/// Fractions closer than this to a grid node (in index units) snap onto it,
/// so rays that coincide with samples reproduce them bit for bit.
const SNAP: f64 = 1e-10;

/// Single-channel image, row-major, NaN for masked pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: f64) -> Self {
        Self { width, height, data: vec![fill; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self { width, height, data }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn is_valid(&self, col: usize, row: usize) -> bool {
        !self.get(col, row).is_nan()
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|v| !v.is_nan()).count()
    }
}

/// Affine map from pixel indices to the ray direction `(u, v)`:
/// `u = u0 + du * col + u_per_s * s`, `v = v0 + dv * row + v_per_t * t`.
///
/// The `s`/`t` terms model principal points that drift across
/// sub-apertures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialMapping {
    pub u0: f64,
    pub du: f64,
    pub v0: f64,
    pub dv: f64,
    #[serde(default)]
    pub u_per_s: f64,
    #[serde(default)]
    pub v_per_t: f64,
}

impl SpatialMapping {
    pub fn u(&self, col: f64, s: f64) -> f64 {
        self.u0 + self.du * col + self.u_per_s * s
    }

    pub fn v(&self, row: f64, t: f64) -> f64 {
        self.v0 + self.dv * row + self.v_per_t * t
    }

    pub fn col(&self, u: f64, s: f64) -> f64 {
        (u - self.u0 - self.u_per_s * s) / self.du
    }

    pub fn row(&self, v: f64, t: f64) -> f64 {
        (v - self.v0 - self.v_per_t * t) / self.dv
    }
}

/// A light field sampled on a rectangular grid of sub-apertures.
///
/// Sub-aperture `(row, col)` sits at `(s_positions[col], t_positions[row])`
/// and its image is `images[row * n_s + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLF {
    pub s_positions: Vec<f64>,
    pub t_positions: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub mapping: SpatialMapping,
    pub images: Vec<Image>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

impl SampledLF {
    pub fn new(
        s_positions: Vec<f64>,
        t_positions: Vec<f64>,
        mapping: SpatialMapping,
        images: Vec<Image>,
    ) -> Result<Self> {
        if s_positions.is_empty() || t_positions.is_empty() {
            return Err(Error::InvalidLightField("empty sub-aperture grid".into()));
        }
        if !strictly_increasing(&s_positions) || !strictly_increasing(&t_positions) {
            return Err(Error::InvalidLightField(
                "sub-aperture positions must be finite and strictly increasing".into(),
            ));
        }
        if images.len() != s_positions.len() * t_positions.len() {
            return Err(Error::InvalidLightField(format!(
                "expected {} images, got {}",
                s_positions.len() * t_positions.len(),
                images.len()
            )));
        }
        let (width, height) = (images[0].width, images[0].height);
        if width == 0 || height == 0 {
            return Err(Error::InvalidLightField("empty images".into()));
        }
        if images.iter().any(|im| im.width != width || im.height != height) {
            return Err(Error::InvalidLightField("images differ in size".into()));
        }
        if !(mapping.du != 0.0 && mapping.dv != 0.0) {
            return Err(Error::InvalidLightField("spatial mapping has zero pixel pitch".into()));
        }
        Ok(Self { s_positions, t_positions, width, height, mapping, images })
    }

    pub fn n_s(&self) -> usize {
        self.s_positions.len()
    }

    pub fn n_t(&self) -> usize {
        self.t_positions.len()
    }

    pub fn image(&self, row: usize, col: usize) -> &Image {
        &self.images[row * self.n_s() + col]
    }

    /// Whether the sub-aperture positions form a uniform lattice.
    pub fn is_regular(&self) -> bool {
        let uniform = |p: &[f64]| {
            if p.len() < 3 {
                return true;
            }
            let step = (p[p.len() - 1] - p[0]) / (p.len() - 1) as f64;
            p.iter().enumerate().all(|(i, x)| (x - (p[0] + i as f64 * step)).abs() <= 1e-9)
        };
        uniform(&self.s_positions) && uniform(&self.t_positions)
    }

    /// Spacing of adjacent sub-apertures along s (mm); 0 for a single column.
    pub fn pitch_s(&self) -> f64 {
        let p = &self.s_positions;
        if p.len() < 2 {
            0.0
        } else {
            (p[p.len() - 1] - p[0]) / (p.len() - 1) as f64
        }
    }

    /// Ray of pixel `(col, row)` of sub-aperture `(ap_row, ap_col)`.
    pub fn pixel_ray(&self, ap_row: usize, ap_col: usize, col: f64, row: f64) -> Ray4D {
        let s = self.s_positions[ap_col];
        let t = self.t_positions[ap_row];
        Ray4D::new(s, t, self.mapping.u(col, s), self.mapping.v(row, t))
    }

    /// Quadrilinear interpolation at a ray in this light field's own
    /// parameterization: the 2x2 surrounding sub-apertures and, in each, the
    /// 2x2 surrounding pixels at the ray's direction.
    pub fn sample(&self, ray: &Ray4D) -> Result<f64> {
        let (sa, sf) = locate(&self.s_positions, ray.s).ok_or(Error::OutOfAperture)?;
        let (ta, tf) = locate(&self.t_positions, ray.t).ok_or(Error::OutOfAperture)?;
        let mut acc = 0.0;
        for (ti, tw) in [(ta, 1.0 - tf), (ta + 1, tf)] {
            if tw == 0.0 {
                continue;
            }
            for (si, sw) in [(sa, 1.0 - sf), (sa + 1, sf)] {
                if sw == 0.0 {
                    continue;
                }
                let s = self.s_positions[si];
                let t = self.t_positions[ti];
                let col = self.mapping.col(ray.u, s);
                let row = self.mapping.row(ray.v, t);
                let value = bilinear(self.image(ti, si), col, row).ok_or(Error::OutOfAperture)?;
                acc += tw * sw * value;
            }
        }
        Ok(acc)
    }
}

/// Bracketing node and fraction of `x` in increasing `nodes`.
fn locate(nodes: &[f64], x: f64) -> Option<(usize, f64)> {
    if !x.is_finite() {
        return None;
    }
    let n = nodes.len();
    if n == 1 {
        let scale = nodes[0].abs().max(1.0);
        return ((x - nodes[0]).abs() <= SNAP * scale).then_some((0, 0.0));
    }
    let first_gap = nodes[1] - nodes[0];
    let last_gap = nodes[n - 1] - nodes[n - 2];
    if x < nodes[0] - SNAP * first_gap || x > nodes[n - 1] + SNAP * last_gap {
        return None;
    }
    let i = nodes.partition_point(|&p| p <= x).clamp(1, n - 1) - 1;
    let frac = ((x - nodes[i]) / (nodes[i + 1] - nodes[i])).clamp(0.0, 1.0);
    Some(snap(i, frac, n))
}

fn snap(i: usize, frac: f64, n: usize) -> (usize, f64) {
    if frac < SNAP {
        (i, 0.0)
    } else if frac > 1.0 - SNAP {
        if i + 1 < n - 1 {
            (i + 1, 0.0)
        } else {
            (i, 1.0)
        }
    } else {
        (i, frac)
    }
}

/// Locates a continuous pixel index on `0..n`.
fn locate_index(x: f64, n: usize) -> Option<(usize, f64)> {
    if !x.is_finite() || x < -SNAP || x > (n - 1) as f64 + SNAP {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let i = (x.floor().max(0.0) as usize).min(n - 2);
    let frac = (x - i as f64).clamp(0.0, 1.0);
    Some(snap(i, frac, n))
}

fn bilinear(img: &Image, col: f64, row: f64) -> Option<f64> {
    let (c, cf) = locate_index(col, img.width)?;
    let (r, rf) = locate_index(row, img.height)?;
    let mut acc = 0.0;
    for (ri, rw) in [(r, 1.0 - rf), (r + 1, rf)] {
        if rw == 0.0 {
            continue;
        }
        for (ci, cw) in [(c, 1.0 - cf), (c + 1, cf)] {
            if cw == 0.0 {
                continue;
            }
            let v = img.get(ci, ri);
            if v.is_nan() {
                return None;
            }
            acc += rw * cw * v;
        }
    }
    Some(acc)
}

/// Luminance of a common-parameterization ray taken from `which` camera's
/// light field.
pub fn interpolate_ray(
    lf: &SampledLF,
    setup: &RectifiedSetup,
    which: CameraId,
    q: &Ray4D,
) -> Result<f64> {
    let src = warp_common_to_lf(q, which, setup).map_err(|_| Error::OutOfAperture)?;
    lf.sample(&src)
}

/// Target sub-aperture layout in the common parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedGrid {
    /// t-coordinates of the target rows (mm), increasing.
    pub rows: Vec<f64>,
    /// s-coordinates of the target columns (mm), increasing.
    pub columns: Vec<f64>,
    /// Camera whose warped columns produced each target column.
    pub column_origin: Vec<CameraId>,
    /// `provenance[row][col]`: source of each target sub-aperture, `None`
    /// when neither warped aperture hull contains it.
    pub provenance: Vec<Vec<Option<CameraId>>>,
    /// Snapping pitch (mm): spacing of the left light field's warped columns.
    pub pitch: f64,
    /// Warped aperture hull corners of each camera, `[s, t]` in mm.
    pub left_hull: Vec<[f64; 2]>,
    pub right_hull: Vec<[f64; 2]>,
}

impl AlignedGrid {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Number of target sub-apertures supplied by `which`.
    pub fn count(&self, which: CameraId) -> usize {
        self.provenance.iter().flatten().filter(|p| **p == Some(which)).count()
    }
}

/// Common-plane position of each sub-aperture's principal ray, `[row][col]`.
pub fn warped_aperture_positions(
    lf: &SampledLF,
    setup: &RectifiedSetup,
    which: CameraId,
) -> Vec<Vec<Option<[f64; 2]>>> {
    lf.t_positions
        .iter()
        .map(|&t| {
            lf.s_positions
                .iter()
                .map(|&s| {
                    warp_lf_to_common(&Ray4D::new(s, t, 0.0, 0.0), which, setup)
                        .ok()
                        .map(|r| [r.s, r.t])
                })
                .collect()
        })
        .collect()
}

/// Transposes a warped aperture grid whose source columns run along the
/// common `t` axis, so that its rows are the ones that end up horizontal.
fn oriented(positions: Vec<Vec<Option<[f64; 2]>>>) -> Vec<Vec<Option<[f64; 2]>>> {
    let (nr, nc) = (positions.len(), positions[0].len());
    let delta = |a: Option<[f64; 2]>, b: Option<[f64; 2]>| a.zip(b).map(|(a, b)| [b[0] - a[0], b[1] - a[1]]);
    let along_row = if nc > 1 { delta(positions[0][0], positions[0][nc - 1]) } else { None };
    let along_col = if nr > 1 { delta(positions[0][0], positions[nr - 1][0]) } else { None };
    let swap = along_row.is_some_and(|d| d[1].abs() > d[0].abs())
        || along_col.is_some_and(|d| d[0].abs() > d[1].abs());
    if !swap {
        return positions;
    }
    (0..nc).map(|c| (0..nr).map(|r| positions[r][c]).collect()).collect()
}

/// Corners of the warped aperture grid in order, or `None` when a corner
/// ray is parallel to the common planes.
fn hull(positions: &[Vec<Option<[f64; 2]>>]) -> Option<Vec<[f64; 2]>> {
    let (nr, nc) = (positions.len(), positions[0].len());
    let mut corners = vec![positions[0][0]?];
    if nc > 1 {
        corners.push(positions[0][nc - 1]?);
    }
    if nr > 1 {
        if nc > 1 {
            corners.push(positions[nr - 1][nc - 1]?);
        }
        corners.push(positions[nr - 1][0]?);
    }
    Some(corners)
}

fn inside_hull(hull: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => (hull[0][0] - p[0]).hypot(hull[0][1] - p[1]) <= tol,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let f = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let q = [a[0] + f * d[0], a[1] + f * d[1]];
            (q[0] - p[0]).hypot(q[1] - p[1]) <= tol
        }
        n => {
            let mut sign = 0.0;
            for i in 0..n {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                let edge = [b[0] - a[0], b[1] - a[1]];
                let len = edge[0].hypot(edge[1]);
                let cross = (edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])) / len;
                if cross.abs() <= tol {
                    continue;
                }
                if sign == 0.0 {
                    sign = cross.signum();
                } else if cross.signum() != sign {
                    return false;
                }
            }
            true
        }
    }
}

fn column_means(positions: &[Vec<Option<[f64; 2]>>]) -> Vec<f64> {
    let nc = positions[0].len();
    (0..nc)
        .filter_map(|c| {
            let vals: Vec<f64> = positions.iter().filter_map(|row| row[c]).map(|p| p[0]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

fn row_means(positions: &[Vec<Option<[f64; 2]>>]) -> Vec<f64> {
    positions
        .iter()
        .filter_map(|row| {
            let vals: Vec<f64> = row.iter().flatten().map(|p| p[1]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

fn dedup_sorted(mut v: Vec<(f64, CameraId)>, tol: f64) -> Vec<(f64, CameraId)> {
    // left entries win ties
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 == CameraId::Right).cmp(&(b.1 == CameraId::Right))));
    let mut out: Vec<(f64, CameraId)> = Vec::with_capacity(v.len());
    for (x, cam) in v {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= tol => {
                if cam == CameraId::Left && last.1 == CameraId::Right {
                    *last = (x, cam);
                }
            }
            _ => out.push((x, cam)),
        }
    }
    out
}

/// Plans the target sub-apertures: rows at the left camera's warped rows,
/// columns at both cameras' warped columns snapped to the left pitch.
///
/// A camera whose aperture grid is turned by more than 45 degrees in the
/// common frame contributes its source columns as rows.
pub fn plan_aligned_grid(
    setup: &RectifiedSetup,
    left: &SampledLF,
    right: &SampledLF,
) -> Result<AlignedGrid> {
    let left_pos = oriented(warped_aperture_positions(left, setup, CameraId::Left));
    let right_pos = oriented(warped_aperture_positions(right, setup, CameraId::Right));
    let left_hull = hull(&left_pos);
    let right_hull = hull(&right_pos);

    let diagnostics = |detail: &str| {
        format!(
            "{detail}; left hull {:?}, right hull {:?}",
            left_hull.as_deref().unwrap_or(&[]),
            right_hull.as_deref().unwrap_or(&[])
        )
    };
    let (Some(left_hull), Some(right_hull)) = (left_hull.clone(), right_hull.clone()) else {
        return Err(Error::NoOverlap(diagnostics("principal rays parallel to the common planes")));
    };

    let mut rows = row_means(&left_pos);
    rows.sort_by(f64::total_cmp);
    rows.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

    let left_cols = column_means(&left_pos);
    let pitch = if left_cols.len() > 1 {
        (left_cols[left_cols.len() - 1] - left_cols[0]).abs() / (left_cols.len() - 1) as f64
    } else {
        0.0
    };
    let right_cols = column_means(&right_pos);
    let anchor = left_cols[0];
    let snap_to_pitch = |x: f64| {
        if pitch > 0.0 {
            anchor + ((x - anchor) / pitch).round() * pitch
        } else {
            x
        }
    };
    let candidates: Vec<(f64, CameraId)> = left_cols
        .iter()
        .map(|&x| (snap_to_pitch(x), CameraId::Left))
        .chain(right_cols.iter().map(|&x| (snap_to_pitch(x), CameraId::Right)))
        .collect();
    let tol = if pitch > 0.0 { 1e-6 * pitch } else { 1e-9 };
    let merged = dedup_sorted(candidates, tol);

    let hull_tol = tol.max(1e-9);
    let contains = |cam: CameraId, p: [f64; 2]| match cam {
        CameraId::Left => inside_hull(&left_hull, p, hull_tol),
        CameraId::Right => inside_hull(&right_hull, p, hull_tol),
    };
    let other = |cam: CameraId| match cam {
        CameraId::Left => CameraId::Right,
        CameraId::Right => CameraId::Left,
    };

    let mut kept_rows = Vec::new();
    let mut provenance = Vec::new();
    for &t in &rows {
        let row: Vec<Option<CameraId>> = merged
            .iter()
            .map(|&(s, origin)| {
                [origin, other(origin)].into_iter().find(|&cam| contains(cam, [s, t]))
            })
            .collect();
        let has_left = row.contains(&Some(CameraId::Left));
        let has_right = row.contains(&Some(CameraId::Right));
        if has_left && has_right {
            kept_rows.push(t);
            provenance.push(row);
        }
    }
    if kept_rows.is_empty() {
        return Err(Error::NoOverlap(diagnostics("no target row holds apertures of both cameras")));
    }

    Ok(AlignedGrid {
        rows: kept_rows,
        columns: merged.iter().map(|m| m.0).collect(),
        column_origin: merged.iter().map(|m| m.1).collect(),
        provenance,
        pitch,
        left_hull,
        right_hull,
    })
}

/// Pixel-to-direction mapping of the rendered light field: the left
/// camera's mapping carried through its rectifying warp, linearized at the
/// centre of the left light field.
pub fn target_mapping(left: &SampledLF, setup: &RectifiedSetup) -> Result<SpatialMapping> {
    let m = &left.mapping;
    let cc = (left.width as f64 - 1.0) / 2.0;
    let rc = (left.height as f64 - 1.0) / 2.0;
    let s_mid = 0.5 * (left.s_positions[0] + left.s_positions[left.n_s() - 1]);
    let t_mid = 0.5 * (left.t_positions[0] + left.t_positions[left.n_t() - 1]);
    let ray = |s: f64, t: f64, col: f64, row: f64| {
        warp_lf_to_common(&Ray4D::new(s, t, m.u(col, s), m.v(row, t)), CameraId::Left, setup)
    };
    let w0 = ray(s_mid, t_mid, cc, rc)?;
    let wc = ray(s_mid, t_mid, cc + 1.0, rc)?;
    let wr = ray(s_mid, t_mid, cc, rc + 1.0)?;
    let du = wc.u - w0.u;
    let dv = wr.v - w0.v;

    let step_s = if left.n_s() > 1 { left.pitch_s() } else { 1.0 };
    let ws = ray(s_mid + step_s, t_mid, cc, rc)?;
    let u_per_s = if (ws.s - w0.s).abs() > 1e-12 { (ws.u - w0.u) / (ws.s - w0.s) } else { 0.0 };
    let step_t = if left.n_t() > 1 {
        (left.t_positions[left.n_t() - 1] - left.t_positions[0]) / (left.n_t() - 1) as f64
    } else {
        1.0
    };
    let wt = ray(s_mid, t_mid + step_t, cc, rc)?;
    let v_per_t = if (wt.t - w0.t).abs() > 1e-12 { (wt.v - w0.v) / (wt.t - w0.t) } else { 0.0 };

    Ok(SpatialMapping {
        u0: w0.u - du * cc - u_per_s * w0.s,
        du,
        v0: w0.v - dv * rc - v_per_t * w0.t,
        dv,
        u_per_s,
        v_per_t,
    })
}

/// Synthesizes one image per target sub-aperture of `grid`. Pixels whose
/// back-warped ray leaves the source sampling hull are masked.
pub fn render_aligned_sais(
    left: &SampledLF,
    right: &SampledLF,
    setup: &RectifiedSetup,
    grid: &AlignedGrid,
) -> Result<SampledLF> {
    let mapping = target_mapping(left, setup)?;
    let (width, height) = (left.width, left.height);
    let cells: Vec<(usize, usize)> =
        (0..grid.n_rows()).flat_map(|r| (0..grid.n_columns()).map(move |c| (r, c))).collect();

    let images: Vec<Image> = cells
        .par_iter()
        .map(|&(r, c)| {
            let Some(cam) = grid.provenance[r][c] else {
                return Image::new(width, height, MASKED);
            };
            let src = match cam {
                CameraId::Left => left,
                CameraId::Right => right,
            };
            let (s, t) = (grid.columns[c], grid.rows[r]);
            Image::from_fn(width, height, |col, row| {
                let q = Ray4D::new(s, t, mapping.u(col as f64, s), mapping.v(row as f64, t));
                interpolate_ray(src, setup, cam, &q).unwrap_or(MASKED)
            })
        })
        .collect();

    SampledLF::new(grid.columns.clone(), grid.rows.clone(), mapping, images)
}

/// Stacks pixel row `row_v` of every sub-aperture in sub-aperture row
/// `row_t`, one EPI row per sub-aperture, ordered by `s`.
pub fn extract_epi(lf: &SampledLF, row_t: usize, row_v: usize) -> Result<Image> {
    if row_t >= lf.n_t() {
        return Err(Error::IndexOutOfRange(format!(
            "sub-aperture row {row_t} (have {})",
            lf.n_t()
        )));
    }
    if row_v >= lf.height {
        return Err(Error::IndexOutOfRange(format!("pixel row {row_v} (have {})", lf.height)));
    }
    let mut data = Vec::with_capacity(lf.n_s() * lf.width);
    for c in 0..lf.n_s() {
        data.extend_from_slice(lf.image(row_t, c).row(row_v));
    }
    Ok(Image { width: lf.width, height: lf.n_s(), data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_lf(f: impl Fn(f64, f64, f64, f64) -> f64) -> SampledLF {
        let s = vec![-1.0, 0.0, 1.0];
        let t = vec![-0.5, 0.5];
        let mapping = SpatialMapping { u0: -0.2, du: 0.05, v0: -0.1, dv: 0.04, u_per_s: 0.01, v_per_t: -0.02 };
        let mut images = Vec::new();
        for &tt in &t {
            for &ss in &s {
                images.push(Image::from_fn(9, 6, |c, r| {
                    f(ss, tt, mapping.u(c as f64, ss), mapping.v(r as f64, tt))
                }));
            }
        }
        SampledLF::new(s, t, mapping, images).unwrap()
    }

    #[test]
    fn nodes_are_reproduced_exactly() {
        let lf = tiny_lf(|s, t, u, v| (3.0 * s + t).sin() + u * v * 7.0);
        for r in 0..2 {
            for c in 0..3 {
                for (pc, pr) in [(0, 0), (4, 3), (8, 5)] {
                    let ray = lf.pixel_ray(r, c, pc as f64, pr as f64);
                    assert_eq!(lf.sample(&ray).unwrap(), lf.image(r, c).get(pc, pr));
                }
            }
        }
    }

    #[test]
    fn outside_hull_is_reported() {
        let lf = tiny_lf(|_, _, _, _| 1.0);
        let mut ray = lf.pixel_ray(0, 0, 0.0, 0.0);
        ray.s -= 0.1;
        assert_eq!(lf.sample(&ray), Err(Error::OutOfAperture));
        let mut ray = lf.pixel_ray(1, 2, 8.0, 5.0);
        ray.u += 0.01;
        assert_eq!(lf.sample(&ray), Err(Error::OutOfAperture));
    }

    #[test]
    fn masked_samples_are_never_blended() {
        let mut lf = tiny_lf(|_, _, _, _| 0.5);
        lf.images[0].set(1, 1, MASKED);
        let ray = lf.pixel_ray(0, 0, 1.5, 1.5);
        assert_eq!(lf.sample(&ray), Err(Error::OutOfAperture));
        let ray = lf.pixel_ray(0, 0, 3.0, 3.0);
        assert_eq!(lf.sample(&ray).unwrap(), 0.5);
    }

    #[test]
    fn epi_of_single_sai_is_its_row() {
        let img = Image::from_fn(5, 3, |c, r| (c + 10 * r) as f64);
        let lf = SampledLF::new(
            vec![0.0],
            vec![0.0],
            SpatialMapping { u0: 0.0, du: 1.0, v0: 0.0, dv: 1.0, u_per_s: 0.0, v_per_t: 0.0 },
            vec![img.clone()],
        )
        .unwrap();
        let epi = extract_epi(&lf, 0, 2).unwrap();
        assert_eq!(epi.height, 1);
        assert_eq!(epi.row(0), img.row(2));
        assert!(matches!(extract_epi(&lf, 1, 0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(extract_epi(&lf, 0, 3), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn hull_containment() {
        let quad = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        assert!(inside_hull(&quad, [1.0, 0.5], 1e-9));
        assert!(inside_hull(&quad, [2.0, 1.0], 1e-9));
        assert!(!inside_hull(&quad, [2.1, 0.5], 1e-9));
        let line = vec![[0.0, 0.0], [2.0, 0.0]];
        assert!(inside_hull(&line, [1.0, 0.0], 1e-9));
        assert!(!inside_hull(&line, [1.0, 0.1], 1e-9));
    }
}
