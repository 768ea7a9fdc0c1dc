//! Synthetic ground truth: checkerboard correspondences observed through a
//! grid of sub-apertures with Gaussian pixel noise, Monte-Carlo trials, and
//! rendered light fields of textured planes.

pub mod features;
mod render;
pub mod verify;

pub use render::{
    render_synthetic_lf, PlenopticCamera, Scene, Texture, TexturedPlane,
};

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angular_error_rotation, angular_error_translation, euler_xyz_deg, project_to_lfpoint,
    LFIntrinsics, LFPoint, RelativePose, ScenePoint3D,
};
use crate::pose::{estimate_pose, CorrespondenceSet};

pub const EULER_CONVENTION: &str = "intrinsic-xyz";

/// Relative pose as written in configuration files. `x_cam2 = R x_cam1 + T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoseSpec {
    /// Intrinsic x-y-z Euler angles, `R = Rx(a) Ry(b) Rz(c)`.
    Euler {
        euler_deg: [f64; 3],
        #[serde(default = "default_convention")]
        euler_convention: String,
        t_mm: [f64; 3],
    },
    Matrix {
        layout: String,
        #[serde(rename = "R")]
        r: [f64; 9],
        #[serde(rename = "T")]
        t: [f64; 3],
    },
}

fn default_convention() -> String {
    EULER_CONVENTION.to_string()
}

impl PoseSpec {
    pub fn euler(euler_deg: [f64; 3], t_mm: [f64; 3]) -> Self {
        Self::Euler { euler_deg, euler_convention: default_convention(), t_mm }
    }

    pub fn to_pose(&self) -> Result<RelativePose> {
        match self {
            PoseSpec::Euler { euler_deg, euler_convention, t_mm } => {
                if euler_convention != EULER_CONVENTION {
                    return Err(Error::InvalidConfig(format!(
                        "unsupported Euler convention {euler_convention:?}; expected {EULER_CONVENTION:?}"
                    )));
                }
                RelativePose::from_euler_xyz_deg(*euler_deg, Vector3::from(*t_mm))
            }
            PoseSpec::Matrix { layout, r, t } => {
                if layout != "row-major" {
                    return Err(Error::InvalidConfig(format!("unsupported layout {layout:?}")));
                }
                RelativePose::new(Matrix3::from_row_slice(r), Vector3::from(*t))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoardSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing_mm: f64,
}

impl Default for BoardSpec {
    fn default() -> Self {
        Self { rows: 7, cols: 11, spacing_mm: 22.5 }
    }
}

/// Placement of the board in the camera-1 frame: its centre, and its
/// orientation as intrinsic x-y-z Euler angles relative to a board facing
/// camera 1 squarely (board x along camera x, board normal along -z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoardPose {
    pub center_mm: [f64; 3],
    pub tilt_deg: [f64; 3],
}

impl BoardPose {
    /// Board-to-camera-1 rigid transform.
    pub fn transform(&self) -> RelativePose {
        let r = euler_xyz_deg(self.tilt_deg);
        RelativePose::new(r, Vector3::from(self.center_mm)).expect("Euler angles give a rotation")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub camera1: LFIntrinsics,
    pub camera2: LFIntrinsics,
    /// Ground truth, camera 1 to camera 2.
    pub pose: PoseSpec,
    #[serde(default)]
    pub board: BoardSpec,
    /// `None` places the boards automatically (see [`default_board_poses`]).
    #[serde(default)]
    pub board_poses: Option<Vec<BoardPose>>,
    /// Sub-apertures per side of the square grid.
    #[serde(default = "default_sai_grid")]
    pub sai_grid: usize,
    /// Standard deviation of the per-SAI corner noise, px.
    #[serde(default)]
    pub sigma_px: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_sai_grid() -> usize {
    13
}

fn default_trials() -> usize {
    100
}

impl SimConfig {
    /// Reference cameras at the given pose with default board and noise settings.
    pub fn table1(pose: PoseSpec, sigma_px: f64) -> Self {
        Self {
            camera1: LFIntrinsics::table1_camera1(),
            camera2: LFIntrinsics::table1_camera2(),
            pose,
            board: BoardSpec::default(),
            board_poses: None,
            sai_grid: 13,
            sigma_px,
            trials: 100,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.camera1.validate()?;
        self.camera2.validate()?;
        self.pose.to_pose()?;
        if !(self.board.spacing_mm > 0.0) || self.board.rows == 0 || self.board.cols == 0 {
            return Err(Error::InvalidConfig("board needs rows, cols > 0 and spacing > 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.sigma_px >= 0.0) || !self.sigma_px.is_finite() {
            return Err(Error::InvalidConfig("sigma_px must be finite and non-negative".into()));
        }
        if self.sai_grid == 0 {
            return Err(Error::InvalidConfig("sai_grid must be positive".into()));
        }
        Ok(())
    }

    pub fn board_poses(&self) -> Result<Vec<BoardPose>> {
        match &self.board_poses {
            Some(p) if !p.is_empty() => Ok(p.clone()),
            Some(_) => Err(Error::InvalidConfig("board_poses is empty".into())),
            None => default_board_poses(self),
        }
    }
}

/// Default boards in the frame of the group: portrait boards yawed +-30
/// degrees and pitched 25 degrees, 100 mm apart in depth.
const BOARD_LAYOUT: [([f64; 3], [f64; 3]); 3] = [
    ([0.0, 30.0, 90.0], [0.0, 0.0, -100.0]),
    ([0.0, -30.0, 90.0], [0.0, 0.0, 0.0]),
    ([25.0, 0.0, 90.0], [0.0, 0.0, 100.0]),
];
/// Largest allowed `|u - cx| / cx` and `|v - cy| / cy` of a default corner.
pub const BOARD_FILL: f64 = 0.97;
const MIN_BOARD_DISTANCE: f64 = 250.0;
const MAX_BOARD_DISTANCE: f64 = 3000.0;
/// Used when no distance keeps every corner in view.
pub const FALLBACK_BOARD_DISTANCE: f64 = 1000.0;

/// Default board placement: the boards of [`BOARD_LAYOUT`] as close to the
/// cameras as possible while every corner stays within [`BOARD_FILL`] of
/// both central sub-aperture images.
pub fn default_board_poses(cfg: &SimConfig) -> Result<Vec<BoardPose>> {
    let pose = cfg.pose.to_pose()?;
    let fits = |d: f64| fill_at(cfg, &pose, d).0 <= BOARD_FILL;
    if !fits(MAX_BOARD_DISTANCE) {
        return Ok(board_poses_at(cfg, FALLBACK_BOARD_DISTANCE)?);
    }
    let (mut lo, mut hi) = (MIN_BOARD_DISTANCE, MAX_BOARD_DISTANCE);
    if fits(lo) {
        hi = lo;
    }
    while hi - lo > 0.5 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    board_poses_at(cfg, hi)
}

/// The default layout with its middle board `distance` mm from camera 1,
/// aimed to balance the corners in both views.
pub fn board_poses_at(cfg: &SimConfig, distance: f64) -> Result<Vec<BoardPose>> {
    let pose = cfg.pose.to_pose()?;
    Ok(fill_at(cfg, &pose, distance).1)
}

/// Best achievable fill at `distance` and the corresponding layout.
fn fill_at(cfg: &SimConfig, pose: &RelativePose, distance: f64) -> (f64, Vec<BoardPose>) {
    let corners = board_corners(&cfg.board);
    let eval = |az: f64, el: f64| {
        let dir = Vector3::new(az.to_radians().tan(), el.to_radians().tan(), 1.0).normalize();
        let boards = layout_along(&dir, distance);
        (layout_fill(cfg, pose, &boards, &corners), boards)
    };
    let (mut az, mut el) = (0.0, 0.0);
    let (mut best, mut boards) = eval(az, el);
    let mut step = 4.0;
    for _ in 0..5 {
        let (ca, ce) = (az, el);
        for i in -8..=8 {
            for j in -8..=8 {
                let (a, e) = (ca + i as f64 * step, ce + j as f64 * step);
                let (f, b) = eval(a, e);
                if f < best {
                    (best, boards, az, el) = (f, b, a, e);
                }
            }
        }
        step /= 4.0;
    }
    (best, boards)
}

fn layout_along(dir: &Vector3<f64>, distance: f64) -> Vec<BoardPose> {
    let base = facing_rotation(dir);
    let center = dir * distance;
    BOARD_LAYOUT
        .iter()
        .map(|(tilt, shift)| BoardPose {
            center_mm: (center + base * Vector3::from(*shift)).into(),
            tilt_deg: rotation_to_euler_xyz_deg(&(base * euler_xyz_deg(*tilt))),
        })
        .collect()
}

/// Largest normalized image offset of any corner in either camera;
/// infinite when a corner is behind a camera.
fn layout_fill(
    cfg: &SimConfig,
    pose: &RelativePose,
    boards: &[BoardPose],
    corners: &[Vector3<f64>],
) -> f64 {
    let mut worst = 0.0_f64;
    for bp in boards {
        let to_cam1 = bp.transform();
        for c in corners {
            let p1 = to_cam1.transform_point(c);
            let p2 = pose.transform_point(&p1);
            for (p, k) in [(p1, &cfg.camera1), (p2, &cfg.camera2)] {
                if !(p.z > 0.0) {
                    return f64::INFINITY;
                }
                let u = (k.fx * p.x / p.z) / k.cx;
                let v = (k.fy * p.y / p.z) / k.cy;
                worst = worst.max(u.abs()).max(v.abs());
            }
        }
    }
    worst
}

/// Rotation taking board z to `dir`, keeping board x as close to camera x
/// as possible.
fn facing_rotation(dir: &Vector3<f64>) -> Matrix3<f64> {
    let z = dir.normalize();
    let x = (Vector3::x() - z * z.x).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}

/// Inverse of [`euler_xyz_deg`] for rotations away from gimbal lock.
pub fn rotation_to_euler_xyz_deg(r: &Matrix3<f64>) -> [f64; 3] {
    // R = Rx(a) Ry(b) Rz(c): r02 = sin b, r12 = -sin a cos b, r22 = cos a cos b,
    // r01 = -cos b sin c, r00 = cos b cos c
    let b = r[(0, 2)].clamp(-1.0, 1.0).asin();
    let a = (-r[(1, 2)]).atan2(r[(2, 2)]);
    let c = (-r[(0, 1)]).atan2(r[(0, 0)]);
    [a.to_degrees(), b.to_degrees(), c.to_degrees()]
}

/// Board corner positions in the board frame (z = 0), centred on the origin.
pub fn board_corners(board: &BoardSpec) -> Vec<Vector3<f64>> {
    let (rows, cols) = (board.rows, board.cols);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(Vector3::new(
                (c as f64 - (cols - 1) as f64 / 2.0) * board.spacing_mm,
                (r as f64 - (rows - 1) as f64 / 2.0) * board.spacing_mm,
                0.0,
            ));
        }
    }
    out
}

/// Corners of every board pose, in camera-1 and camera-2 coordinates.
pub fn generate_corners(cfg: &SimConfig) -> Result<Vec<(ScenePoint3D, ScenePoint3D)>> {
    let pose = cfg.pose.to_pose()?;
    let corners = board_corners(&cfg.board);
    let mut out = Vec::new();
    for bp in cfg.board_poses()? {
        let to_cam1 = bp.transform();
        for c in &corners {
            let p1 = to_cam1.transform_point(c);
            let p2 = pose.transform_point(&p1);
            if !(p1.z > 0.0) {
                return Err(Error::BehindCamera { camera: 1, z: p1.z });
            }
            if !(p2.z > 0.0) {
                return Err(Error::BehindCamera { camera: 2, z: p2.z });
            }
            out.push((ScenePoint3D::from_vector(&p1), ScenePoint3D::from_vector(&p2)));
        }
    }
    Ok(out)
}

/// Whether every corner projects inside `[0, 2 cx) x [0, 2 cy)` of both
/// central sub-aperture images.
pub fn corners_visible(cfg: &SimConfig) -> Result<bool> {
    let inside = |p: &ScenePoint3D, k: &LFIntrinsics| -> Result<bool> {
        let lp = project_to_lfpoint(p, k)?;
        Ok(lp.u_c >= 0.0 && lp.u_c < 2.0 * k.cx && lp.v_c >= 0.0 && lp.v_c < 2.0 * k.cy)
    };
    for (p1, p2) in generate_corners(cfg)? {
        if !inside(&p1, &cfg.camera1)? || !inside(&p2, &cfg.camera2)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A corner seen in sub-aperture `(row, col)` of an `n x n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaiObservation {
    pub row: usize,
    pub col: usize,
    pub u: f64,
    pub v: f64,
}

/// Offset of index `i` from the centre of an `n`-wide grid.
fn offset(i: usize, n: usize) -> f64 {
    i as f64 - (n as f64 - 1.0) / 2.0
}

/// Per-SAI image coordinates of a point: `u_c + dj * lambda`,
/// `v_c + di * lambda` with `(di, dj)` the offset from the central SAI.
pub fn project_corner_observations(
    p: &ScenePoint3D,
    k: &LFIntrinsics,
    grid: usize,
) -> Result<Vec<SaiObservation>> {
    let lp = project_to_lfpoint(p, k)?;
    Ok(observations_of(&lp, grid))
}

pub fn observations_of(lp: &LFPoint, grid: usize) -> Vec<SaiObservation> {
    let mut out = Vec::with_capacity(grid * grid);
    for row in 0..grid {
        for col in 0..grid {
            out.push(SaiObservation {
                row,
                col,
                u: lp.u_c + offset(col, grid) * lp.lambda,
                v: lp.v_c + offset(row, grid) * lp.lambda,
            });
        }
    }
    out
}

/// Adds i.i.d. `N(0, sigma^2)` noise to both coordinates of every observation.
pub fn add_observation_noise<R: Rng + ?Sized>(
    obs: &[SaiObservation],
    sigma: f64,
    rng: &mut R,
) -> Vec<SaiObservation> {
    if sigma == 0.0 {
        return obs.to_vec();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    obs.iter()
        .map(|o| SaiObservation {
            u: o.u + normal.sample(rng),
            v: o.v + normal.sample(rng),
            ..*o
        })
        .collect()
}

/// Least-squares LF-point of a set of per-SAI observations.
pub fn refit_lfpoint(obs: &[SaiObservation], grid: usize) -> Result<LFPoint> {
    let first = obs.first().ok_or(Error::InsufficientObservations)?;
    if obs.iter().all(|o| o.row == first.row && o.col == first.col) {
        return Err(Error::InsufficientObservations);
    }
    let n = obs.len() as f64;
    let (mut sa, mut sb, mut saa, mut su, mut sv, mut sl) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for o in obs {
        let a = offset(o.col, grid);
        let b = offset(o.row, grid);
        sa += a;
        sb += b;
        saa += a * a + b * b;
        su += o.u;
        sv += o.v;
        sl += a * o.u + b * o.v;
    }
    let normal = Matrix3::new(n, 0.0, sa, 0.0, n, sb, sa, sb, saa);
    let rhs = Vector3::new(su, sv, sl);
    let x = normal.lu().solve(&rhs).ok_or(Error::InsufficientObservations)?;
    Ok(LFPoint::new(x[0], x[1], x[2]))
}

/// Variance of the refitted disparity for i.i.d. noise of standard
/// deviation `sigma` on a full `grid x grid` set of observations.
pub fn refit_lambda_variance(sigma: f64, grid: usize) -> f64 {
    let per_axis: f64 = (0..grid).map(|i| offset(i, grid).powi(2)).sum::<f64>() * grid as f64;
    sigma * sigma / (2.0 * per_axis)
}

/// Noisy LF-point correspondences for one trial.
pub fn simulate_correspondences<R: Rng + ?Sized>(
    cfg: &SimConfig,
    corners: &[(ScenePoint3D, ScenePoint3D)],
    rng: &mut R,
) -> Result<CorrespondenceSet> {
    let mut pairs = Vec::with_capacity(corners.len());
    let fit = |p: &ScenePoint3D, k: &LFIntrinsics, rng: &mut R| -> Result<LFPoint> {
        let obs = project_corner_observations(p, k, cfg.sai_grid)?;
        let noisy = add_observation_noise(&obs, cfg.sigma_px, rng);
        refit_lfpoint(&noisy, cfg.sai_grid)
    };
    for (p1, p2) in corners {
        let a = fit(p1, &cfg.camera1, rng)?;
        let b = fit(p2, &cfg.camera2, rng)?;
        pairs.push((a, b));
    }
    CorrespondenceSet::new(pairs, cfg.camera1, cfg.camera2)
}

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub err_r_deg: f64,
    pub err_t_deg: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the trial failed; the error columns are then NaN.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: Vec<TrialResult>,
    pub mean_err_r: f64,
    pub std_err_r: f64,
    pub mean_err_t: f64,
    pub std_err_t: f64,
    pub failures: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl TrialReport {
    pub fn from_trials(trials: Vec<TrialResult>) -> Self {
        let ok: Vec<&TrialResult> = trials.iter().filter(|t| t.failure.is_none()).collect();
        let (mean_err_r, std_err_r) = mean_std(&ok.iter().map(|t| t.err_r_deg).collect::<Vec<_>>());
        let (mean_err_t, std_err_t) = mean_std(&ok.iter().map(|t| t.err_t_deg).collect::<Vec<_>>());
        let failures = trials.len() - ok.len();
        Self { trials, mean_err_r, std_err_r, mean_err_t, std_err_t, failures }
    }
}

/// One Monte-Carlo trial: noisy observations, refit, estimate, score.
pub fn run_trial(
    cfg: &SimConfig,
    truth: &RelativePose,
    corners: &[(ScenePoint3D, ScenePoint3D)],
    trial: usize,
) -> TrialResult {
    let mut rng = trial_rng(cfg.seed, trial);
    let outcome = simulate_correspondences(cfg, corners, &mut rng).and_then(|corr| {
        let est = estimate_pose(&corr)?;
        let err_t = angular_error_translation(truth.translation(), est.pose.translation())?;
        let err_r = angular_error_rotation(truth.rotation(), est.pose.rotation());
        Ok((err_r, err_t, est))
    });
    match outcome {
        Ok((err_r, err_t, est)) => {
            let (converged, iterations) = est
                .refinement
                .as_ref()
                .map_or((false, 0), |r| (r.converged(), r.iterations));
            TrialResult { trial, err_r_deg: err_r, err_t_deg: err_t, converged, iterations, failure: None }
        }
        Err(e) => TrialResult {
            trial,
            err_r_deg: f64::NAN,
            err_t_deg: f64::NAN,
            converged: false,
            iterations: 0,
            failure: Some(e.to_string()),
        },
    }
}

/// Runs `cfg.trials` independent trials; trial `i` uses seed `cfg.seed + i`.
/// Trials run on the current rayon pool and are reported in index order.
pub fn run_trials(cfg: &SimConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let truth = cfg.pose.to_pose()?;
    let corners = generate_corners(cfg)?;
    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &truth, &corners, i))
        .collect();
    Ok(TrialReport::from_trials(trials))
}

/// Rotation by `angle_deg` about `axis`.
pub fn axis_angle_deg(axis: &Vector3<f64>, angle_deg: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle_deg.to_radians()).into_inner()
}
