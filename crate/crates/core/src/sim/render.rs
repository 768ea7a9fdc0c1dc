use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LFIntrinsics, RelativePose};
use crate::resample::{Image, SampledLF, SpatialMapping, MASKED};

/// Luminance pattern on a plane, in plane coordinates (mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Texture {
    Constant { value: f64 },
    /// `offset + gx * x + gy * y`.
    Gradient { offset: f64, gx: f64, gy: f64 },
    /// Smooth checkerboard `0.5 + 0.5 tanh(k sin(pi x / a) sin(pi y / a))`
    /// with squares of side `a`. Edges lie exactly on `x, y = n a`.
    Checkerboard { square_mm: f64, sharpness: f64 },
    /// Sum of `terms` random sinusoids with wavelengths >= `min_wavelength_mm`.
    Noise { seed: u64, terms: usize, min_wavelength_mm: f64 },
}

impl Texture {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Texture::Constant { value } => *value,
            Texture::Gradient { offset, gx, gy } => offset + gx * x + gy * y,
            Texture::Checkerboard { square_mm, sharpness } => {
                let a = std::f64::consts::PI / square_mm;
                0.5 + 0.5 * (sharpness * (a * x).sin() * (a * y).sin()).tanh()
            }
            Texture::Noise { seed, terms, min_wavelength_mm } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut acc = 0.0;
                for _ in 0..*terms {
                    let dir: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let wl = min_wavelength_mm * rng.random_range(1.0..4.0);
                    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let k = std::f64::consts::TAU / wl;
                    acc += (k * (dir.cos() * x + dir.sin() * y) + phase).sin();
                }
                0.5 + 0.5 * acc / (*terms).max(1) as f64
            }
        }
    }
}

/// A textured plane through `origin` spanned by the orthonormal `axis_x`,
/// `axis_y`. `half_extent` bounds it to a rectangle; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TexturedPlane {
    pub origin: [f64; 3],
    pub axis_x: [f64; 3],
    pub axis_y: [f64; 3],
    #[serde(default)]
    pub half_extent: Option<[f64; 2]>,
    pub texture: Texture,
}

impl TexturedPlane {
    /// Fronto-parallel plane at depth `z`.
    pub fn fronto_parallel(z: f64, texture: Texture) -> Self {
        Self {
            origin: [0.0, 0.0, z],
            axis_x: [1.0, 0.0, 0.0],
            axis_y: [0.0, 1.0, 0.0],
            half_extent: None,
            texture,
        }
    }

    /// Ray parameter and texture value of the hit, if any.
    fn intersect(&self, o: &Vector3<f64>, d: &Vector3<f64>) -> Option<(f64, f64)> {
        let p0 = Vector3::from(self.origin);
        let ex = Vector3::from(self.axis_x);
        let ey = Vector3::from(self.axis_y);
        let n = ex.cross(&ey);
        let denom = n.dot(d);
        if denom.abs() < 1e-15 {
            return None;
        }
        let lambda = n.dot(&(p0 - o)) / denom;
        if !(lambda > 0.0) {
            return None;
        }
        let rel = o + d * lambda - p0;
        let (x, y) = (ex.dot(&rel), ey.dot(&rel));
        if let Some([hx, hy]) = self.half_extent {
            if x.abs() > hx || y.abs() > hy {
                return None;
            }
        }
        Some((lambda, self.texture.eval(x, y)))
    }
}

/// Planes in world (camera-1) coordinates; rays that miss every plane
/// are masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub planes: Vec<TexturedPlane>,
}

/// A plenoptic camera with an `grid x grid` array of sub-apertures of
/// `width x height` pixels. `pose` maps world coordinates into the camera.
///
/// Sub-aperture `(i, j)` has its centre of projection at
/// `((j - c) K2 / fx, (i - c) K2 / fy)` on the ST plane and pixel `(col, row)`
/// looks along `u = (col - cx + K1 (j - c)) / fx`, which reproduces the
/// LF-point model's disparity `-K1 - K2 / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlenopticCamera {
    pub intrinsics: LFIntrinsics,
    pub grid: usize,
    pub width: usize,
    pub height: usize,
    pub pose: RelativePose,
}

impl PlenopticCamera {
    pub fn sai_pitch(&self) -> (f64, f64) {
        let k = &self.intrinsics;
        (k.k2 / k.fx, k.k2 / k.fy)
    }

    pub fn mapping(&self) -> SpatialMapping {
        let k = &self.intrinsics;
        SpatialMapping {
            u0: -k.cx / k.fx,
            du: 1.0 / k.fx,
            v0: -k.cy / k.fy,
            dv: 1.0 / k.fy,
            u_per_s: k.k1 / k.k2,
            v_per_t: k.k1 / k.k2,
        }
    }

    pub fn positions(&self) -> (Vec<f64>, Vec<f64>) {
        let (bs, bt) = self.sai_pitch();
        let c = (self.grid as f64 - 1.0) / 2.0;
        let s = (0..self.grid).map(|j| (j as f64 - c) * bs).collect();
        let t = (0..self.grid).map(|i| (i as f64 - c) * bt).collect();
        (s, t)
    }
}

/// Renders every sub-aperture image of `camera` looking at `scene`.
pub fn render_synthetic_lf(scene: &Scene, camera: &PlenopticCamera) -> Result<SampledLF> {
    camera.intrinsics.validate()?;
    if camera.grid == 0 || camera.width == 0 || camera.height == 0 {
        return Err(Error::InvalidConfig("camera grid and image size must be positive".into()));
    }
    let (s_pos, t_pos) = camera.positions();
    let mapping = camera.mapping();
    let to_world = camera.pose.inverse();
    let r = *to_world.rotation();
    let n = camera.grid;
    let images: Vec<Image> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (s, t) = (s_pos[idx % n], t_pos[idx / n]);
            let origin = to_world.transform_point(&Vector3::new(s, t, 0.0));
            Image::from_fn(camera.width, camera.height, |col, row| {
                let u = mapping.u(col as f64, s);
                let v = mapping.v(row as f64, t);
                let d = r * Vector3::new(u, v, 1.0);
                scene
                    .planes
                    .iter()
                    .filter_map(|p| p.intersect(&origin, &d))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map_or(MASKED, |(_, value)| value)
            })
        })
        .collect();
    SampledLF::new(s_pos, t_pos, mapping, images)
}
