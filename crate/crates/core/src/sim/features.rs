//! Sub-pixel feature measurements on rendered images, used to check
//! rendering and resampling geometry.

use crate::resample::Image;

/// Sub-pixel positions where `samples` crosses `level`, from a cubic through
/// the four samples around each sign change. Masked (NaN) samples break the
/// sequence.
pub fn level_crossings(samples: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..samples.len().saturating_sub(1) {
        let (a, b) = (samples[i] - level, samples[i + 1] - level);
        if a.is_nan() || b.is_nan() || a == b || (a > 0.0) == (b > 0.0) && a != 0.0 {
            continue;
        }
        if a == 0.0 {
            out.push(i as f64);
            continue;
        }
        let linear = a / (a - b);
        let refined = if i >= 1 && i + 2 < samples.len() {
            let p = [samples[i - 1] - level, a, b, samples[i + 2] - level];
            if p.iter().any(|x| x.is_nan()) {
                linear
            } else {
                cubic_root(p, linear)
            }
        } else {
            linear
        };
        out.push(i as f64 + refined);
    }
    out
}

/// Root in `[0, 1]` of the cubic through `(-1, p0), (0, p1), (1, p2), (2, p3)`.
fn cubic_root(p: [f64; 4], start: f64) -> f64 {
    let f = |x: f64| {
        // Lagrange form on nodes -1, 0, 1, 2
        let l0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        let l1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        let l2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        let l3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        p[0] * l0 + p[1] * l1 + p[2] * l2 + p[3] * l3
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let flo = f(lo);
    if (flo > 0.0) == (f(hi) > 0.0) {
        return start;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Crossings of `level` along image row `row`.
pub fn row_crossings(img: &Image, row: usize, level: f64) -> Vec<f64> {
    level_crossings(img.row(row), level)
}

/// Crossings of `level` along image column `col`.
pub fn column_crossings(img: &Image, col: usize, level: f64) -> Vec<f64> {
    let column: Vec<f64> = (0..img.height).map(|r| img.get(col, r)).collect();
    level_crossings(&column, level)
}

/// The crossing in `crossings` closest to `near`, if within `max_dist`.
pub fn nearest(crossings: &[f64], near: f64, max_dist: f64) -> Option<f64> {
    crossings
        .iter()
        .copied()
        .filter(|c| (c - near).abs() <= max_dist)
        .min_by(|a, b| (a - near).abs().total_cmp(&(b - near).abs()))
}

/// Sub-pixel checkerboard corner near `(col, row)`: intersection of the
/// vertical edge measured on rows `row +- offset` with the horizontal edge
/// measured on columns `col +- offset`.
pub fn locate_corner(img: &Image, col: f64, row: f64, offset: usize, search: f64) -> Option<(f64, f64)> {
    let (c0, r0) = (col.round() as isize, row.round() as isize);
    let off = offset as isize;
    let in_w = |c: isize| c >= 0 && (c as usize) < img.width;
    let in_h = |r: isize| r >= 0 && (r as usize) < img.height;
    if !in_h(r0 - off) || !in_h(r0 + off) || !in_w(c0 - off) || !in_w(c0 + off) {
        return None;
    }
    let xa = nearest(&row_crossings(img, (r0 - off) as usize, 0.5), col, search)?;
    let xb = nearest(&row_crossings(img, (r0 + off) as usize, 0.5), col, search)?;
    let ya = nearest(&column_crossings(img, (c0 - off) as usize, 0.5), row, search)?;
    let yb = nearest(&column_crossings(img, (c0 + off) as usize, 0.5), row, search)?;
    // vertical edge: x = xa + (y - ya_row) * sx; horizontal: y = ya + (x - xa_col) * sy
    let (ra, rb) = ((r0 - off) as f64, (r0 + off) as f64);
    let (ca, cb) = ((c0 - off) as f64, (c0 + off) as f64);
    let sx = (xb - xa) / (rb - ra);
    let sy = (yb - ya) / (cb - ca);
    // x = xa + (y - ra) sx, y = ya + (x - ca) sy
    let x = (xa + (ya - ra) * sx - ca * sy * sx) / (1.0 - sx * sy);
    let y = ya + (x - ca) * sy;
    Some((x, y))
}
