//! Fixtures shared by the benchmarks.

use lfrect::pose::CorrespondenceSet;
use lfrect::rectify::RectifiedSetup;
use lfrect::resample::{plan_aligned_grid, AlignedGrid, SampledLF};
use lfrect::sim::verify::{common_depth, plane_facing_common};
use lfrect::sim::{
    generate_corners, render_synthetic_lf, simulate_correspondences, trial_rng, PlenopticCamera,
    PoseSpec, Scene, SimConfig, Texture,
};
use lfrect::sweep::{TABLE2_EULER_DEG, TABLE2_T_MM};
use lfrect::{LFIntrinsics, RelativePose};

/// Reference cameras at the reference noise-sweep pose with default boards.
pub fn table2_config(sigma_px: f64, trials: usize) -> SimConfig {
    let mut cfg = SimConfig::table1(PoseSpec::euler(TABLE2_EULER_DEG, TABLE2_T_MM), sigma_px);
    cfg.trials = trials;
    cfg
}

/// One trial's correspondences for `cfg`.
pub fn correspondences(cfg: &SimConfig, trial: usize) -> CorrespondenceSet {
    let corners = generate_corners(cfg).expect("default boards are in view");
    simulate_correspondences(cfg, &corners, &mut trial_rng(cfg.seed, trial)).expect("valid config")
}

/// A small plenoptic camera: 160x120 px sub-apertures on a `grid x grid` array.
pub fn small_camera(pose: RelativePose, grid: usize) -> PlenopticCamera {
    PlenopticCamera {
        intrinsics: LFIntrinsics::new(220.0, 220.0, 80.0, 60.0, 0.03, 66.0).expect("valid intrinsics"),
        grid,
        width: 160,
        height: 120,
        pose,
    }
}

/// Both light fields of a checkerboard plane 450 mm ahead, ready to rectify.
pub struct StereoScene {
    pub setup: RectifiedSetup,
    pub scene: Scene,
    pub left: SampledLF,
    pub right: SampledLF,
    pub grid: AlignedGrid,
}

pub fn stereo_scene(grid: usize) -> StereoScene {
    let pose = RelativePose::from_euler_xyz_deg([5.0, 15.0, 5.0], [50.0, 0.0, 0.0].into()).expect("rotation");
    let setup = RectifiedSetup::from_camera1_to_camera2(&pose).expect("non-zero baseline");
    let z = common_depth(&setup, 450.0).expect("plane in front");
    let texture = Texture::Checkerboard { square_mm: 15.0, sharpness: 1.5 };
    let scene = Scene { planes: vec![plane_facing_common(&setup, z, texture)] };
    let left = render_synthetic_lf(&scene, &small_camera(RelativePose::identity(), grid)).expect("render");
    let right = render_synthetic_lf(&scene, &small_camera(pose, grid)).expect("render");
    let grid = plan_aligned_grid(&setup, &left, &right).expect("overlap");
    StereoScene { setup, scene, left, right, grid }
}
