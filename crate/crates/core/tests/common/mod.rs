#![allow(dead_code)]

use lfrect::geometry::euler_xyz_deg;
use lfrect::pose::CorrespondenceSet;
use lfrect::sim::{board_corners, BoardPose, BoardSpec};
use lfrect::{project_to_lfpoint, LFIntrinsics, LFPoint, RelativePose, ScenePoint3D};
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn k1() -> LFIntrinsics {
    LFIntrinsics::table1_camera1()
}

pub fn k2() -> LFIntrinsics {
    LFIntrinsics::table1_camera2()
}

pub fn pose(euler_deg: [f64; 3], t: [f64; 3]) -> RelativePose {
    RelativePose::from_euler_xyz_deg(euler_deg, Vector3::from(t)).unwrap()
}

pub fn table2_pose() -> RelativePose {
    pose([5.0, 20.0, 5.0], [80.0, 5.0, 5.0])
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng, max_deg: f64) -> Matrix3<f64> {
    let axis = Unit::new_normalize(random_unit(rng));
    let angle = rng.random_range(-max_deg..max_deg).to_radians();
    Rotation3::from_axis_angle(&axis, angle).into_inner()
}

pub fn random_pose(rng: &mut impl Rng, max_deg: f64, max_t: f64) -> RelativePose {
    let t = Vector3::new(
        rng.random_range(-max_t..max_t),
        rng.random_range(-max_t..max_t),
        rng.random_range(-max_t..max_t),
    );
    RelativePose::new(random_rotation(rng, max_deg), t).unwrap()
}

/// Corners of `rows x cols` boards at the given placements (camera-1 frame).
pub fn board_points(rows: usize, cols: usize, boards: &[BoardPose]) -> Vec<Vector3<f64>> {
    let spec = BoardSpec { rows, cols, spacing_mm: 22.5 };
    let corners = board_corners(&spec);
    boards
        .iter()
        .flat_map(|b| {
            let t = b.transform();
            corners.iter().map(move |c| t.transform_point(c)).collect::<Vec<_>>()
        })
        .collect()
}

/// Two boards about 600 mm ahead, 20 degrees apart.
pub fn two_boards() -> Vec<BoardPose> {
    vec![
        BoardPose { center_mm: [-20.0, 0.0, 600.0], tilt_deg: [10.0, 0.0, 0.0] },
        BoardPose { center_mm: [20.0, 10.0, 650.0], tilt_deg: [-10.0, 15.0, 0.0] },
    ]
}

/// Noise-free LF-point pairs of camera-1 points seen through `pose`.
pub fn pairs_from_points(
    points: &[Vector3<f64>],
    pose: &RelativePose,
    ka: &LFIntrinsics,
    kb: &LFIntrinsics,
) -> Vec<(LFPoint, LFPoint)> {
    points
        .iter()
        .map(|p| {
            let a = project_to_lfpoint(&ScenePoint3D::from_vector(p), ka).unwrap();
            let b = project_to_lfpoint(&ScenePoint3D::from_vector(&pose.transform_point(p)), kb)
                .unwrap();
            (a, b)
        })
        .collect()
}

pub fn correspondences(points: &[Vector3<f64>], pose: &RelativePose) -> CorrespondenceSet {
    CorrespondenceSet::new(pairs_from_points(points, pose, &k1(), &k2()), k1(), k2()).unwrap()
}

/// 20 points on two boards (2 x 5 corners each).
pub fn twenty_points() -> Vec<Vector3<f64>> {
    board_points(2, 5, &two_boards())
}

/// Random points in a box in front of camera 1.
pub fn random_points(rng: &mut impl Rng, n: usize) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| {
            Vector3::new(
                rng.random_range(-150.0..150.0),
                rng.random_range(-100.0..100.0),
                rng.random_range(400.0..900.0),
            )
        })
        .collect()
}

pub fn euler(angles: [f64; 3]) -> Matrix3<f64> {
    euler_xyz_deg(angles)
}

pub mod rig {
    use lfrect::rectify::RectifiedSetup;
    use lfrect::resample::{plan_aligned_grid, render_aligned_sais, AlignedGrid, SampledLF};
    use lfrect::sim::verify::{common_depth, plane_facing_common};
    use lfrect::sim::{render_synthetic_lf, PlenopticCamera, Scene, Texture, TexturedPlane};
    use lfrect::{LFIntrinsics, RelativePose};
    use nalgebra::{Matrix3, Vector3};

    pub const SQUARE_MM: f64 = 15.0;
    pub const DISTANCE_MM: f64 = 450.0;

    pub fn small_intrinsics() -> LFIntrinsics {
        LFIntrinsics::new(220.0, 220.0, 80.0, 60.0, 0.03, 66.0).unwrap()
    }

    pub fn camera(pose: RelativePose, grid: usize) -> PlenopticCamera {
        PlenopticCamera { intrinsics: small_intrinsics(), grid, width: 160, height: 120, pose }
    }

    /// Camera-1-to-camera-2 pose of a camera at `center` (camera-1 frame)
    /// rotated by `r`.
    pub fn pose_from_center(r: Matrix3<f64>, center: Vector3<f64>) -> RelativePose {
        RelativePose::new(r, -(r * center)).unwrap()
    }

    pub struct Rectified {
        pub setup: RectifiedSetup,
        pub left: SampledLF,
        pub right: SampledLF,
        pub grid: AlignedGrid,
        pub out: SampledLF,
        pub z: f64,
    }

    pub fn checker() -> Texture {
        Texture::Checkerboard { square_mm: SQUARE_MM, sharpness: 1.5 }
    }

    /// Renders both cameras looking at a checkerboard plane facing the common
    /// frame (or `plane` if given) and rectifies with the exact pose.
    pub fn rectify_scene(cam1_to_cam2: &RelativePose, grid: usize, plane: Option<TexturedPlane>) -> Rectified {
        let setup = RectifiedSetup::from_camera1_to_camera2(cam1_to_cam2).unwrap();
        let z = common_depth(&setup, DISTANCE_MM).unwrap();
        let plane = plane.unwrap_or_else(|| plane_facing_common(&setup, z, checker()));
        let scene = Scene { planes: vec![plane] };
        let left = render_synthetic_lf(&scene, &camera(RelativePose::identity(), grid)).unwrap();
        let right = render_synthetic_lf(&scene, &camera(*cam1_to_cam2, grid)).unwrap();
        let g = plan_aligned_grid(&setup, &left, &right).unwrap();
        let out = render_aligned_sais(&left, &right, &setup, &g).unwrap();
        Rectified { setup, left, right, grid: g, out, z }
    }
}
