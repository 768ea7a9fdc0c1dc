use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use log::{info, warn};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use lfrect::io::{
    read_correspondence_set, read_json, read_light_field, read_pose, write_correspondences,
    write_json, write_light_field, write_mask_pbm, write_pgm16, write_pose, write_text, IntrinsicsPair,
    PoseFile, SetupFile,
};
use lfrect::pose::{estimate_pose_with, DegeneracyReport, EstimateOptions, RefineStep, StopReason};
use lfrect::rectify::{CameraId, RectifiedSetup};
use lfrect::resample::{extract_epi, plan_aligned_grid, render_aligned_sais, SpatialMapping};
use lfrect::sim::verify::{common_depth, plane_facing_common, scanline_spread, ScanlineReport};
use lfrect::sim::{
    generate_corners, render_synthetic_lf, rotation_to_euler_xyz_deg, simulate_correspondences,
    trial_rng, PlenopticCamera, Scene, SimConfig, Texture, TexturedPlane, EULER_CONVENTION,
};
use lfrect::sweep::{bench_csv, bench_dat, run_bench_with, trial_csv, BenchSpec, Scenario};
use lfrect::{angular_error_rotation, angular_error_translation, LFIntrinsics, RelativePose};

use crate::failure::Failure;

fn need_out(out: Option<&Path>) -> Result<&Path, Failure> {
    out.ok_or_else(|| Failure::config("--out is required"))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::config(format!("{}: {e}", dir.display())))
}

#[derive(Debug, Serialize)]
struct PoseSummary {
    #[serde(flatten)]
    pose: PoseFile,
    euler_deg: [f64; 3],
    euler_convention: &'static str,
    units: &'static str,
}

impl PoseSummary {
    fn new(pose: &RelativePose) -> Self {
        Self {
            pose: PoseFile::from_pose(pose),
            euler_deg: rotation_to_euler_xyz_deg(pose.rotation()),
            euler_convention: EULER_CONVENTION,
            units: "mm, degrees",
        }
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Trial index whose noise draw is written.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    /// Also render both light fields of a checkerboard plane (JSON spec).
    #[arg(long)]
    pub render: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct GroundTruth {
    #[serde(flatten)]
    pose: PoseSummary,
    sigma_px: f64,
    seed: u64,
    trial: usize,
    sai_grid: usize,
    correspondences: usize,
}

/// Rendering of a checkerboard plane that faces the common frame of the
/// ground-truth rectification.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    /// Intrinsics of both rendered cameras; defaults to the config's.
    #[serde(default)]
    pub camera: Option<LFIntrinsics>,
    pub grid: usize,
    pub width: usize,
    pub height: usize,
    /// Distance of the plane along the left optical axis, mm.
    pub distance_mm: f64,
    pub square_mm: f64,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
}

fn default_sharpness() -> f64 {
    1.5
}

/// Scene description written next to rendered light fields; `rectify
/// --scene` uses it to measure scan-line alignment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    /// Plane in camera-1 coordinates, mm.
    pub plane: TexturedPlane,
    pub square_mm: f64,
    /// Corners `i, j` in `-n..=n` along the plane axes are checked.
    pub corners_per_side: i32,
}

const SCENE_CORNERS_PER_SIDE: i32 = 10;

pub fn simulate(args: &SimulateArgs, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let out = need_out(out)?;
    let mut cfg: SimConfig = read_json(&args.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let render: Option<RenderSpec> = args.render.as_deref().map(read_json).transpose()?;
    let truth = cfg.pose.to_pose()?;

    let corners = generate_corners(&cfg).map_err(|e| Failure::from(e).generation())?;
    let mut rng = trial_rng(cfg.seed, args.trial);
    let corr = simulate_correspondences(&cfg, &corners, &mut rng).map_err(|e| Failure::from(e).generation())?;

    create_dir(out)?;
    write_correspondences(&out.join("correspondences.csv"), corr.pairs())?;
    write_json(&out.join("intrinsics.json"), &IntrinsicsPair { camera1: cfg.camera1, camera2: cfg.camera2 })?;
    write_json(
        &out.join("ground_truth.json"),
        &GroundTruth {
            pose: PoseSummary::new(&truth),
            sigma_px: cfg.sigma_px,
            seed: cfg.seed,
            trial: args.trial,
            sai_grid: cfg.sai_grid,
            correspondences: corr.len(),
        },
    )?;
    info!("wrote {} correspondences to {}", corr.len(), out.display());

    if let Some(spec) = render {
        render_pair(&cfg, &truth, &spec, out).map_err(Failure::generation)?;
    }
    Ok(())
}

fn render_pair(cfg: &SimConfig, truth: &RelativePose, spec: &RenderSpec, out: &Path) -> Result<(), Failure> {
    if spec.grid == 0 || spec.width == 0 || spec.height == 0 {
        return Err(Failure::config("render grid, width and height must be positive"));
    }
    if !(spec.distance_mm > 0.0 && spec.square_mm > 0.0) {
        return Err(Failure::config("render distance_mm and square_mm must be positive"));
    }
    let setup = RectifiedSetup::from_camera1_to_camera2(truth)?;
    let z = common_depth(&setup, spec.distance_mm)?;
    let texture = Texture::Checkerboard { square_mm: spec.square_mm, sharpness: spec.sharpness };
    let plane = plane_facing_common(&setup, z, texture);
    let scene = Scene { planes: vec![plane.clone()] };
    let camera = |k: LFIntrinsics, pose: RelativePose| PlenopticCamera {
        intrinsics: spec.camera.unwrap_or(k),
        grid: spec.grid,
        width: spec.width,
        height: spec.height,
        pose,
    };
    let left = render_synthetic_lf(&scene, &camera(cfg.camera1, RelativePose::identity()))?;
    let right = render_synthetic_lf(&scene, &camera(cfg.camera2, *truth))?;
    write_light_field(&out.join("left"), &left, None)?;
    write_light_field(&out.join("right"), &right, None)?;
    let scene_file =
        SceneFile { plane, square_mm: spec.square_mm, corners_per_side: SCENE_CORNERS_PER_SIDE };
    write_json(&out.join("scene.json"), &scene_file)?;
    info!("rendered {0}x{0} light fields of {1}x{2} px", spec.grid, spec.width, spec.height);
    Ok(())
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Correspondence CSV.
    #[arg(long)]
    pub points: PathBuf,
    /// Intrinsics of both cameras (JSON).
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Report the linear solution without refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Ground-truth pose to score the estimate against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RefinementReport {
    iterations: usize,
    converged: bool,
    stop: StopReason,
    initial_cost_px2: f64,
    final_cost_px2: f64,
    trace: Vec<RefineStep>,
}

#[derive(Debug, Serialize)]
struct Errors {
    err_r_deg: f64,
    err_t_deg: f64,
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    pose: PoseSummary,
    linear_pose: PoseSummary,
    correspondences: usize,
    linear_cost_px2: f64,
    final_cost_px2: f64,
    degeneracy: DegeneracyReport,
    /// Spectrum of the constrained linear system, descending.
    singular_values: Vec<f64>,
    refinement: Option<RefinementReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<Errors>,
}

pub fn estimate(args: &EstimateArgs, out: Option<&Path>) -> Result<(), Failure> {
    let out = need_out(out)?;
    let corr = read_correspondence_set(&args.points, &args.intrinsics)?;
    let truth = args.truth.as_deref().map(read_pose).transpose()?;
    let opts = EstimateOptions { refine: !args.no_refine, ..EstimateOptions::default() };
    let est = estimate_pose_with(&corr, &opts)?;

    let errors = match truth {
        Some(t) => Some(Errors {
            err_r_deg: angular_error_rotation(t.rotation(), est.pose.rotation()),
            err_t_deg: angular_error_translation(t.translation(), est.pose.translation())?,
        }),
        None => None,
    };
    let report = EstimateReport {
        pose: PoseSummary::new(&est.pose),
        linear_pose: PoseSummary::new(&est.linear_pose),
        correspondences: corr.len(),
        linear_cost_px2: est.linear_cost,
        final_cost_px2: est.final_cost(),
        degeneracy: est.degeneracy.clone(),
        singular_values: est.solution.singular_values.clone(),
        refinement: est.refinement.as_ref().map(|r| RefinementReport {
            iterations: r.iterations,
            converged: r.converged(),
            stop: r.stop.clone(),
            initial_cost_px2: r.initial_cost,
            final_cost_px2: r.final_cost,
            trace: r.trace.clone(),
        }),
        errors,
    };
    create_dir(out)?;
    write_pose(&out.join("pose.json"), &est.pose)?;
    write_json(&out.join("estimate_report.json"), &report)?;
    if let Some(r) = &est.refinement {
        if !r.converged() {
            warn!("refinement stopped without converging ({:?})", r.stop);
        }
    }
    if let Some(e) = &report.errors {
        info!("rotation error {:.3e} deg, translation error {:.3e} deg", e.err_r_deg, e.err_t_deg);
    }
    info!("cost {:.6e} px^2 (linear {:.6e})", report.final_cost_px2, report.linear_cost_px2);
    Ok(())
}

// ---------------------------------------------------------------- rectify

#[derive(Debug, Args)]
pub struct RectifyArgs {
    /// Camera-1-to-camera-2 pose (JSON); camera 1 is the left camera.
    #[arg(long)]
    pub pose: PathBuf,
    /// Light-field directory of camera 1.
    #[arg(long)]
    pub left: PathBuf,
    /// Light-field directory of camera 2.
    #[arg(long)]
    pub right: PathBuf,
    /// Scene description from `simulate --render`; enables the scan-line check.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Sub-apertures a corner must be found in for its scan-line spread to count.
    #[arg(long, default_value_t = 3)]
    pub min_count: usize,
}

#[derive(Debug, Serialize)]
struct ScanlineSummary {
    tracks: usize,
    max_spread_px: f64,
    max_prediction_error_px: f64,
}

impl From<&ScanlineReport> for ScanlineSummary {
    fn from(r: &ScanlineReport) -> Self {
        Self {
            tracks: r.tracks.len(),
            max_spread_px: r.max_spread_px,
            max_prediction_error_px: r.max_prediction_error_px,
        }
    }
}

#[derive(Debug, Serialize)]
struct RectifyReport {
    rows: usize,
    columns: usize,
    pitch_mm: f64,
    from_left: usize,
    from_right: usize,
    left_hull: Vec<[f64; 2]>,
    right_hull: Vec<[f64; 2]>,
    mapping: SpatialMapping,
    #[serde(skip_serializing_if = "Option::is_none")]
    scanline: Option<ScanlineSummary>,
}

pub fn rectify(args: &RectifyArgs, out: Option<&Path>) -> Result<(), Failure> {
    let out = need_out(out)?;
    let pose = read_pose(&args.pose)?;
    let scene: Option<SceneFile> = args.scene.as_deref().map(read_json).transpose()?;
    let left = read_light_field(&args.left)?;
    let right = read_light_field(&args.right)?;
    let setup = RectifiedSetup::from_camera1_to_camera2(&pose)?;
    let grid = plan_aligned_grid(&setup, &left, &right)?;
    info!("target grid {} x {}, pitch {:.4} mm", grid.n_rows(), grid.n_columns(), grid.pitch);
    let lf = render_aligned_sais(&left, &right, &setup, &grid)?;

    let scanline = scene.map(|s| {
        let to_common = setup.to_common(CameraId::Left);
        let corners = plane_corners(&s).iter().map(|p| to_common.transform_point(p)).collect::<Vec<_>>();
        scanline_spread(&lf, &corners, args.min_count)
    });

    create_dir(out)?;
    write_light_field(&out.join("sais"), &lf, Some(&grid.provenance))?;
    write_json(&out.join("setup.json"), &SetupFile::from_setup(&setup))?;
    let report = RectifyReport {
        rows: grid.n_rows(),
        columns: grid.n_columns(),
        pitch_mm: grid.pitch,
        from_left: grid.count(CameraId::Left),
        from_right: grid.count(CameraId::Right),
        left_hull: grid.left_hull.clone(),
        right_hull: grid.right_hull.clone(),
        mapping: lf.mapping,
        scanline: scanline.as_ref().map(ScanlineSummary::from),
    };
    write_json(&out.join("rectify_report.json"), &report)?;
    if let Some(s) = &scanline {
        if s.tracks.is_empty() {
            warn!("no checkerboard corner was tracked; scan-line residual unavailable");
        } else {
            eprintln!(
                "scan-line residual: {:.4} px over {} corner tracks",
                s.max_spread_px,
                s.tracks.len()
            );
        }
    }
    Ok(())
}

fn plane_corners(s: &SceneFile) -> Vec<Vector3<f64>> {
    let origin = Vector3::from(s.plane.origin);
    let ex = Vector3::from(s.plane.axis_x);
    let ey = Vector3::from(s.plane.axis_y);
    let n = s.corners_per_side;
    let mut out = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            out.push(origin + ex * (i as f64 * s.square_mm) + ey * (j as f64 * s.square_mm));
        }
    }
    out
}

// ---------------------------------------------------------------- epi

#[derive(Debug, Args)]
pub struct EpiArgs {
    /// Light-field directory.
    #[arg(long)]
    pub sais: PathBuf,
    /// Sub-aperture row.
    #[arg(long)]
    pub row: usize,
    /// Pixel row within each sub-aperture image.
    #[arg(long)]
    pub line: usize,
}

pub fn epi(args: &EpiArgs, out: Option<&Path>) -> Result<(), Failure> {
    let out = need_out(out)?;
    let lf = read_light_field(&args.sais)?;
    let img = extract_epi(&lf, args.row, args.line)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_pgm16(out, &img)?;
    write_mask_pbm(&out.with_extension("pbm"), &img)?;
    info!("EPI {} x {} written to {}", img.width, img.height, out.display());
    Ok(())
}

// ---------------------------------------------------------------- bench

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark spec (JSON).
    #[arg(long, conflicts_with = "scenario")]
    pub spec: Option<PathBuf>,
    /// Preset scenario instead of a spec file.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
    /// Trials per row, overriding the spec.
    #[arg(long)]
    pub trials: Option<usize>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    match s {
        "table2" => Ok(Scenario::Table2),
        "table3" => Ok(Scenario::Table3),
        other => Err(format!("unknown scenario {other:?}; expected table2 or table3")),
    }
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

pub fn bench(args: &BenchArgs, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let out = need_out(out)?;
    let mut spec = match (&args.spec, args.scenario) {
        (Some(path), _) => read_json::<BenchSpec>(path)?,
        (None, Some(s)) => BenchSpec::preset(s, 100, 0),
        (None, None) => return Err(Failure::config("give --spec or --scenario")),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    let n_rows = spec.rows()?.len();
    let rows = run_bench_with(&spec, |i, row| {
        info!(
            "[{}/{}] {}: err_R {:.4} deg, err_T {:.4} deg, {} failures",
            i + 1,
            n_rows,
            row.label,
            row.report.mean_err_r,
            row.report.mean_err_t,
            row.report.failures
        );
    })
    .map_err(|e| Failure::from(e).generation())?;

    let trials_dir = out.join("trials");
    create_dir(&trials_dir)?;
    write_text(&out.join("bench.csv"), &bench_csv(&rows))?;
    write_text(&out.join("bench.dat"), &bench_dat(&rows))?;
    for (i, row) in rows.iter().enumerate() {
        let name = format!("{i:02}_{}.csv", file_label(&row.label));
        write_text(&trials_dir.join(name), &trial_csv(&row.report))?;
    }
    let failures: usize = rows.iter().map(|r| r.report.failures).sum();
    if failures > 0 {
        warn!("{failures} trials failed and were excluded from the means");
    }
    Ok(())
}
