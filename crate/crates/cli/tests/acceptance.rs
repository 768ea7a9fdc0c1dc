//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 3 compare Monte-Carlo means with published values; a band
//! miss is reported as FAIL without failing the run, provided the
//! monotonicity and zero-noise checks that must accompany it hold. Every
//! other check failing makes the process exit non-zero.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lfrect::pose::{
    build_dlt_system, constraint_matrix, estimate_pose, jacobian, normalize_points, refine_pose,
    residuals, retract, translation_system, vec_col_major, vec_row_major, CorrespondenceSet,
};
use lfrect::rectify::{build_rectified_setup, rectifying_rotation, warp_lf_to_common, warp_ray, CameraId, RectifiedSetup};
use lfrect::resample::{plan_aligned_grid, render_aligned_sais, Image, SampledLF, SpatialMapping};
use lfrect::sim::verify::{analytic_epi_slope, checker_corners, common_depth, epi_traces, plane_facing_common, project_common, scanline_spread};
use lfrect::sim::{generate_corners, render_synthetic_lf, simulate_correspondences, trial_rng, PlenopticCamera, PoseSpec, Scene, SimConfig, Texture};
use lfrect::sweep::{run_bench_with, table3_poses, BenchRow, BenchSpec, Scenario, TABLE2_EULER_DEG, TABLE2_T_MM};
use lfrect::{angular_error_rotation, angular_error_translation, LFIntrinsics, Ray4D, RelativePose};
use nalgebra::{DMatrix, Matrix3, Rotation3, Unit, Vector3, Vector6};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    pass: bool,
    /// A failing hard verdict fails the run.
    hard: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, hard: true, summary: summary.into(), details: Vec::new() }
    }
}

/// Accumulates named checks into one verdict.
#[derive(Default)]
struct Checks {
    lines: Vec<String>,
    failed: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, line: String) {
        self.failed += usize::from(!ok);
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn verdict(self, summary: &str) -> Verdict {
        let pass = self.failed == 0;
        Verdict { pass, hard: true, summary: summary.to_string(), details: self.lines }
    }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_unit(r: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_rotation(r: &mut impl Rng, max_deg: f64) -> Matrix3<f64> {
    let axis = Unit::new_normalize(random_unit(r));
    Rotation3::from_axis_angle(&axis, r.random_range(-max_deg..max_deg).to_radians()).into_inner()
}

fn random_pose(r: &mut impl Rng, max_deg: f64, max_t: f64) -> RelativePose {
    let t = Vector3::new(r.random_range(-max_t..max_t), r.random_range(-max_t..max_t), r.random_range(-max_t..max_t));
    RelativePose::new(random_rotation(r, max_deg), t).unwrap()
}

fn euler_pose(e: [f64; 3], t: [f64; 3]) -> RelativePose {
    RelativePose::from_euler_xyz_deg(e, Vector3::from(t)).unwrap()
}

fn preset_poses() -> Vec<(String, PoseSpec)> {
    let mut out = vec![("table2".to_string(), PoseSpec::euler(TABLE2_EULER_DEG, TABLE2_T_MM))];
    out.extend(table3_poses().into_iter().map(|p| (p.name, p.pose)));
    out
}

fn exact_correspondences(cfg: &SimConfig) -> CorrespondenceSet {
    let corners = generate_corners(cfg).unwrap();
    simulate_correspondences(cfg, &corners, &mut trial_rng(0, 0)).unwrap()
}

// ------------------------------------------------------------ criterion 1

fn zero_noise() -> Verdict {
    let mut c = Checks::default();
    for (name, pose) in preset_poses() {
        let cfg = SimConfig::table1(pose.clone(), 0.0);
        let truth = pose.to_pose().unwrap();
        let start = Instant::now();
        let outcome = generate_corners(&cfg).and_then(|corners| {
            let corr = simulate_correspondences(&cfg, &corners, &mut trial_rng(0, 0))?;
            estimate_pose(&corr)
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(est) => {
                let er = angular_error_rotation(truth.rotation(), est.pose.rotation());
                let et = angular_error_translation(truth.translation(), est.pose.translation()).unwrap();
                let ok = er <= 1e-6 && et <= 1e-6 && elapsed <= Duration::from_secs(1);
                c.check(ok, format!("{name}: err_R {er:.2e} deg, err_T {et:.2e} deg, {:.1} ms", elapsed.as_secs_f64() * 1e3));
            }
            Err(e) => c.check(false, format!("{name}: {e}")),
        }
    }
    c.verdict("sigma = 0 on all presets: errors <= 1e-6 deg, <= 1 s each")
}

// ------------------------------------------------------- criteria 2 and 3

fn within_factor_2(got: f64, reference: f64) -> bool {
    got >= reference / 2.0 && got <= reference * 2.0
}

fn band_line(label: &str, row: &BenchRow, reference: (f64, f64)) -> (bool, bool, String) {
    let (r, t) = (row.report.mean_err_r, row.report.mean_err_t);
    let (ok_r, ok_t) = (within_factor_2(r, reference.0), within_factor_2(t, reference.1));
    let line = format!(
        "{label}: err_R {r:.4} (reference {:.4}, x{:.2}) {}, err_T {t:.4} (reference {:.4}, x{:.2}) {}, failures {}",
        reference.0,
        r / reference.0,
        if ok_r { "in band" } else { "OUT of band" },
        reference.1,
        t / reference.1,
        if ok_t { "in band" } else { "OUT of band" },
        row.report.failures
    );
    (ok_r, ok_t, line)
}

fn run_rows(spec: &BenchSpec) -> (Vec<BenchRow>, Vec<Duration>) {
    let mut times = Vec::new();
    let mut last = Instant::now();
    let rows = run_bench_with(spec, |_, _| {
        times.push(last.elapsed());
        last = Instant::now();
    })
    .unwrap();
    (rows, times)
}

fn table2(zero_noise_ok: bool) -> Verdict {
    let mut spec = BenchSpec::preset(Scenario::Table2, 100, 0);
    spec.sigma_list = Some(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
    let (rows, times) = run_rows(&spec);
    let mut details = Vec::new();
    for (row, dt) in rows.iter().zip(&times) {
        details.push(format!(
            "sigma {}: err_R {:.4} +- {:.4}, err_T {:.4} +- {:.4} deg, {:.1} s",
            row.label,
            row.report.mean_err_r,
            row.report.std_err_r,
            row.report.mean_err_t,
            row.report.std_err_t,
            dt.as_secs_f64()
        ));
    }
    let mono = |f: fn(&BenchRow) -> f64| rows.windows(2).all(|w| f(&w[1]) >= f(&w[0]));
    let mono_r = mono(|r| r.report.mean_err_r);
    let mono_t = mono(|r| r.report.mean_err_t);
    let fast = times.iter().all(|t| *t <= Duration::from_secs(120));
    let (b1r, b1t, l1) = band_line("sigma 0.1", &rows[0], (0.0275, 0.1355));
    let (b5r, b5t, l5) = band_line("sigma 0.5", &rows[4], (0.2024, 0.7511));
    details.push(l1);
    details.push(l5);
    details.push(format!("monotone in sigma: rotation {mono_r}, translation {mono_t}; <= 2 min per sigma: {fast}"));
    let bands = b1r && b1t && b5r && b5t;
    let pass = mono_r && mono_t && fast && bands;
    let mut v = Verdict::new(pass, "noise sweep: monotone means, factor-2 bands at sigma 0.1 and 0.5");
    // a band miss alone is the documented-discrepancy case
    v.hard = !(mono_r && mono_t && fast && zero_noise_ok);
    if !bands {
        details.push("band miss analysed in the decisions ledger (board placement, refit noise model)".into());
    }
    v.details = details;
    v
}

fn table3() -> Verdict {
    let spec = BenchSpec::preset(Scenario::Table3, 100, 0);
    let (rows, times) = run_rows(&spec);
    let reference = [(0.0713, 0.5083), (0.1340, 0.4649), (0.0628, 0.5162), (0.1237, 0.4730)];
    let mut details = Vec::new();
    let mut bands = true;
    for ((row, p), dt) in rows.iter().zip(reference).zip(&times) {
        let (ok_r, ok_t, line) = band_line(&row.label, row, p);
        bands &= ok_r && ok_t;
        details.push(format!("{line}, {:.1} s", dt.as_secs_f64()));
    }
    // rotation error grows from T1 to T2 at fixed R
    let trend_r1 = rows[1].report.mean_err_r > rows[0].report.mean_err_r;
    let trend_r2 = rows[3].report.mean_err_r > rows[2].report.mean_err_r;
    details.push(format!(
        "rotation error T1 -> T2: R1 {:.4} -> {:.4} ({}), R2 {:.4} -> {:.4} ({})",
        rows[0].report.mean_err_r,
        rows[1].report.mean_err_r,
        if trend_r1 { "increases" } else { "does not increase" },
        rows[2].report.mean_err_r,
        rows[3].report.mean_err_r,
        if trend_r2 { "increases" } else { "does not increase" },
    ));
    if !bands {
        details.push("band miss analysed in the decisions ledger (board placement, refit noise model)".into());
    }
    let mut v = Verdict::new(bands && trend_r1 && trend_r2, "pose sweep at sigma 0.3: factor-2 bands, rotation error T1 < T2");
    v.hard = false;
    v.details = details;
    v
}

// ------------------------------------------------------------ criterion 4

fn solver_oracles() -> Verdict {
    let mut c = Checks::default();
    let mut worst_q = 0.0_f64;
    let mut worst_dlt = 0.0_f64;
    let mut worst_t = 0.0_f64;
    for (_, pose) in preset_poses() {
        let cfg = SimConfig::table1(pose.clone(), 0.0);
        let truth = pose.to_pose().unwrap();
        let corr = exact_correspondences(&cfg);
        let (k, kp) = corr.intrinsics();
        let (a, b): (Vec<_>, Vec<_>) = corr.pairs().iter().copied().unzip();
        let (_, n) = normalize_points(&a).unwrap();
        let (_, np) = normalize_points(&b).unwrap();
        let w = np.matrix() * kp.matrix_h() * truth.to_homogeneous() * k.matrix_h_inverse() * n.inverse_matrix();
        let v = vec_row_major(&(w / w.norm()));

        // distance of vec(W') from the column space of Q by least squares
        let q = constraint_matrix(k, kp, &n, &np);
        let qd = DMatrix::from_column_slice(16, 13, q.as_slice());
        let x = qd.clone().svd(true, true).solve(&v, 0.0).unwrap();
        worst_q = worst_q.max((&qd * x - &v).norm());

        let a_mat = build_dlt_system(&corr, &n, &np);
        worst_dlt = worst_dlt.max((&a_mat * &v).norm() / a_mat.norm());

        let (a_r, a_t) = translation_system(&corr);
        let lhs = &a_r * vec_col_major(truth.rotation());
        let resid = &lhs + &a_t * truth.translation();
        worst_t = worst_t.max(resid.amax() / lhs.amax());
    }
    c.check(worst_q <= 1e-10, format!("Q consistency: residual {worst_q:.2e} (<= 1e-10)"));
    c.check(worst_dlt <= 1e-10, format!("DLT residual on true W': {worst_dlt:.2e} (<= 1e-10)"));
    c.check(worst_t <= 1e-10, format!("A_R vec(R) + A_T T residual: {worst_t:.2e} (<= 1e-10)"));

    // Jacobian and monotone cost on noisy data from perturbed starts
    let mut r = rng(4);
    let truth = euler_pose(TABLE2_EULER_DEG, TABLE2_T_MM);
    let cfg = SimConfig::table1(PoseSpec::euler(TABLE2_EULER_DEG, TABLE2_T_MM), 0.3);
    let corners = generate_corners(&cfg).unwrap();
    let corr = simulate_correspondences(&cfg, &corners, &mut trial_rng(7, 0)).unwrap();
    let mut worst_j = 0.0_f64;
    let mut violations = 0;
    let mut accepted = 0;
    for _ in 0..10 {
        let at = RelativePose::new(random_rotation(&mut r, 3.0) * truth.rotation(), truth.translation() + random_unit(&mut r) * 4.0).unwrap();
        let j = jacobian(&corr, &at);
        let mut fd = DMatrix::zeros(j.nrows(), 6);
        for k in 0..6 {
            let h = if k < 3 { 1e-6 } else { 1e-4 };
            let mut d = Vector6::zeros();
            d[k] = h;
            let plus = residuals(&corr, &retract(&at, &d));
            d[k] = -h;
            let minus = residuals(&corr, &retract(&at, &d));
            fd.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        worst_j = worst_j.max((&j - &fd).amax() / j.amax());

        let out = refine_pose(&corr, &at).unwrap();
        let mut prev = out.initial_cost;
        for step in out.trace.iter().filter(|s| s.accepted) {
            accepted += 1;
            violations += usize::from(step.cost > prev);
            prev = step.cost;
        }
    }
    c.check(worst_j <= 1e-5, format!("Jacobian vs central differences: relative {worst_j:.2e} (<= 1e-5)"));
    c.check(violations == 0 && accepted > 0, format!("LM cost monotone: {violations} increases over {accepted} accepted steps"));
    c.verdict("solver internals against independent oracles")
}

// ------------------------------------------------------------ criterion 5

fn warp_by_construction(r: &Ray4D, pose: &RelativePose) -> Ray4D {
    let p1 = pose.transform_point(&Vector3::new(r.s, r.t, 0.0));
    let p2 = pose.transform_point(&Vector3::new(r.s + r.u, r.t + r.v, 1.0));
    let l1 = p1.z / (p1.z - p2.z);
    let l2 = (p1.z - 1.0) / (p1.z - p2.z);
    let st = p1 + (p2 - p1) * l1;
    let uv = p1 + (p2 - p1) * l2;
    Ray4D::new(st.x, st.y, uv.x - st.x, uv.y - st.y)
}

fn random_ray(r: &mut impl Rng) -> Ray4D {
    Ray4D::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0), r.random_range(-0.5..0.5), r.random_range(-0.5..0.5))
}

fn ray_diff(a: &Ray4D, b: &Ray4D) -> f64 {
    [a.s - b.s, a.t - b.t, a.u - b.u, a.v - b.v].iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn rectifier_suite() -> Verdict {
    let mut c = Checks::default();
    let mut r = rng(5);
    let (mut worst_cf, mut worst_rt, mut n) = (0.0_f64, 0.0_f64, 0);
    while n < 1000 {
        let pose = random_pose(&mut r, 45.0, 200.0);
        let ray = random_ray(&mut r);
        let Ok(got) = warp_ray(&ray, &pose) else { continue };
        let expected = warp_by_construction(&ray, &pose);
        let scale = [expected.s, expected.t, expected.u, expected.v].iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        worst_cf = worst_cf.max(ray_diff(&got, &expected) / scale);
        let back = warp_ray(&got, &pose.inverse()).unwrap();
        worst_rt = worst_rt.max(ray_diff(&back, &ray));
        n += 1;
    }
    c.check(worst_cf <= 1e-10, format!("closed-form warp vs construction, 1000 cases: {worst_cf:.2e} (<= 1e-10)"));
    c.check(worst_rt <= 1e-9, format!("warp round trip: {worst_rt:.2e} (<= 1e-9)"));

    let (mut worst_orth, mut worst_det, mut worst_h) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let p = random_pose(&mut r, 45.0, 200.0);
        let Ok(rr) = rectifying_rotation(&p) else { continue };
        worst_orth = worst_orth.max((rr.transpose() * rr - Matrix3::identity()).amax());
        worst_det = worst_det.max((rr.determinant() - 1.0).abs());
        let rt = rr * p.translation();
        worst_h = worst_h.max(rt[1].abs().max(rt[2].abs()));
    }
    let ok = worst_orth <= 1e-9 && worst_det <= 1e-9 && worst_h <= 1e-9;
    c.check(ok, format!("R_rect: orthonormality {worst_orth:.1e}, |det - 1| {worst_det:.1e}, R_rect T off-axis {worst_h:.1e} (<= 1e-9)"));

    let mut worst_tri = 0.0_f64;
    for _ in 0..200 {
        let p = RelativePose::new(
            random_rotation(&mut r, 20.0),
            Vector3::new(r.random_range(40.0..120.0), r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)),
        )
        .unwrap();
        let s = build_rectified_setup(&p).unwrap();
        let x_left = Vector3::new(r.random_range(-100.0..100.0), r.random_range(-100.0..100.0), r.random_range(400.0..1500.0));
        let x_right = p.inverse().transform_point(&x_left);
        let x_common = s.r_rect * x_left;
        for (which, x) in [(CameraId::Left, x_left), (CameraId::Right, x_right)] {
            for (ss, tt) in [(0.0, 0.0), (1.5, -0.5), (-2.0, 1.0)] {
                let ray = Ray4D::new(ss, tt, (x.x - ss) / x.z, (x.y - tt) / x.z);
                let w = warp_lf_to_common(&ray, which, &s).unwrap();
                worst_tri = worst_tri.max((w.point_at_depth(x_common.z) - x_common).norm());
            }
        }
    }
    c.check(worst_tri <= 1e-8, format!("two-camera ray bundles meet at the scene point: {worst_tri:.2e} mm (<= 1e-8)"));
    c.verdict("rectifier properties")
}

// ------------------------------------------------------------ criterion 6

fn grid_positions(n: usize, pitch: f64) -> Vec<f64> {
    (0..n).map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * pitch).collect()
}

fn lf_from_fn(n: usize, m: SpatialMapping, size: (usize, usize), f: impl Fn(f64, f64, f64, f64) -> f64) -> SampledLF {
    let (s, t) = (grid_positions(n, 0.3), grid_positions(n, 0.3));
    let mut images = Vec::new();
    for &tt in &t {
        for &ss in &s {
            images.push(Image::from_fn(size.0, size.1, |c, r| f(ss, tt, m.u(c as f64, ss), m.v(r as f64, tt))));
        }
    }
    SampledLF::new(s, t, m, images).unwrap()
}

fn small_camera(pose: RelativePose) -> PlenopticCamera {
    PlenopticCamera {
        intrinsics: LFIntrinsics::new(220.0, 220.0, 80.0, 60.0, 0.03, 66.0).unwrap(),
        grid: 5,
        width: 160,
        height: 120,
        pose,
    }
}

const SQUARE_MM: f64 = 15.0;

struct Rig {
    out: SampledLF,
    z: f64,
    n_left: usize,
}

/// Checkerboard plane facing the common frame `distance` mm ahead of the
/// left camera, rendered by both cameras and rectified with the exact pose.
fn rig(cam1_to_cam2: &RelativePose, distance: f64) -> Rig {
    let setup = RectifiedSetup::from_camera1_to_camera2(cam1_to_cam2).unwrap();
    let z = common_depth(&setup, distance).unwrap();
    let texture = Texture::Checkerboard { square_mm: SQUARE_MM, sharpness: 1.5 };
    let scene = Scene { planes: vec![plane_facing_common(&setup, z, texture)] };
    let left = render_synthetic_lf(&scene, &small_camera(RelativePose::identity())).unwrap();
    let right = render_synthetic_lf(&scene, &small_camera(*cam1_to_cam2)).unwrap();
    let grid = plan_aligned_grid(&setup, &left, &right).unwrap();
    let out = render_aligned_sais(&left, &right, &setup, &grid).unwrap();
    let n_left = grid.column_origin.iter().filter(|c| **c == CameraId::Left).count();
    Rig { out, z, n_left }
}

fn pose_from_center(e: [f64; 3], center: [f64; 3]) -> RelativePose {
    let r = RelativePose::from_euler_xyz_deg(e, Vector3::zeros()).unwrap();
    RelativePose::new(*r.rotation(), -(r.rotation() * Vector3::from(center))).unwrap()
}

fn resampler_suite() -> Verdict {
    let mut c = Checks::default();
    let m = SpatialMapping { u0: -0.3, du: 1.0 / 220.0, v0: -0.25, dv: 1.0 / 220.0, u_per_s: 0.03 / 66.0, v_per_t: 0.03 / 66.0 };
    let mut r = rng(6);

    let lf = lf_from_fn(5, m, (40, 30), |s, t, u, v| (s * 3.0 + u * 50.0).sin() * (t - v * 20.0).cos());
    let mut node_misses = 0;
    for _ in 0..500 {
        let (ar, ac) = (r.random_range(0..5), r.random_range(0..5));
        let (col, row) = (r.random_range(0..40), r.random_range(0..30));
        let got = lf.sample(&lf.pixel_ray(ar, ac, col as f64, row as f64)).unwrap();
        node_misses += usize::from(got != lf.image(ar, ac).get(col, row));
    }
    c.check(node_misses == 0, format!("node reproduction: {node_misses} of 500 samples differ"));

    let field = |s: f64, t: f64, u: f64, v: f64| 0.7 * s - 1.3 * t + 25.0 * u - 40.0 * v + 3.0;
    let affine = lf_from_fn(5, m, (160, 120), field);
    let mut worst = 0.0_f64;
    for _ in 0..2000 {
        let (s, t) = (r.random_range(-0.6..0.6), r.random_range(-0.6..0.6));
        let ray = Ray4D::new(s, t, m.u(r.random_range(2.0..157.0), s), m.v(r.random_range(2.0..117.0), t));
        worst = worst.max((affine.sample(&ray).unwrap() - field(ray.s, ray.t, ray.u, ray.v)).abs());
    }
    c.check(worst <= 1e-12, format!("affine field reproduction: {worst:.2e} (<= 1e-12)"));

    let poses = [
        ("tilted", pose_from_center([1.0, -4.0, 0.5], [60.0, 2.0, -3.0])),
        ("left of", pose_from_center([-2.0, 3.0, -1.0], [-45.0, -4.0, 5.0])),
        ("R1T1", euler_pose([5.0, 15.0, 5.0], [50.0, 0.0, 0.0])),
    ];
    for (name, p) in &poses {
        let rg = rig(p, 450.0);
        let report = scanline_spread(&rg.out, &checker_corners(SQUARE_MM, 6, rg.z), 2);
        let both = report.tracks.iter().filter(|t| t.count > rg.n_left).count();
        let ok = report.max_spread_px <= 0.1 && both >= 10;
        c.check(ok, format!("scan-line spread ({name}): {:.4} px over {} tracks, {both} spanning both cameras (<= 0.1 px)", report.max_spread_px, report.tracks.len()));
    }

    let truth = poses[0].1;
    for distance in [350.0, 450.0, 700.0] {
        let rg = rig(&truth, distance);
        let row_t = rg.out.n_t() / 2;
        let (_, row) = project_common(&rg.out, row_t, rg.out.n_s() / 2, &Vector3::new(0.0, 0.5 * SQUARE_MM, rg.z));
        let edges: Vec<f64> = (-8..=8).map(|i| i as f64 * SQUARE_MM).collect();
        let traces = epi_traces(&rg.out, row_t, row.round() as usize, rg.z, &edges, rg.n_left + 2).unwrap();
        let analytic = analytic_epi_slope(&rg.out.mapping, rg.z);
        let res = traces.iter().map(|t| t.max_residual_px).fold(0.0, f64::max);
        let slope = traces.iter().map(|t| ((t.slope - analytic) / analytic).abs()).fold(0.0, f64::max);
        let ok = !traces.is_empty() && res <= 0.5 && slope <= 0.02;
        c.check(ok, format!("EPI at {distance} mm: {} traces, residual {res:.3} px (<= 0.5), slope error {:.2}% (<= 2%)", traces.len(), slope * 100.0));
    }
    c.verdict("resampler: nodes, affine exactness, scan lines, EPI lines")
}

// ------------------------------------------------------------ criterion 7

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let run = |jobs: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_lfrect"))
            .args(["bench", "--scenario", "table2", "--trials", "20", "--seed", "42", "--jobs", jobs, "--out", out])
            .current_dir(tmp.path())
            .status()
            .unwrap();
        status.success()
    };
    let ok_runs = run("1", "a") && run("1", "b") && run("4", "c");
    let read = |d: &str| std::fs::read(tmp.path().join(d).join("bench.csv")).ok();
    let (a, b, cc) = (read("a"), read("b"), read("c"));
    let same_runs = ok_runs && a.is_some() && a == b;
    let same_jobs = ok_runs && a.is_some() && a == cc;
    let trials_same = ok_runs && dir_equal(&tmp.path().join("a/trials"), &tmp.path().join("c/trials"));
    let mut v = Verdict::new(
        same_runs && same_jobs && trials_same,
        "bench CSV byte-identical across runs and --jobs",
    );
    v.details.push(format!("repeat run identical: {same_runs}; --jobs 1 vs 4 identical: {same_jobs}; per-trial tables identical: {trials_same}"));
    v
}

fn dir_equal(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).map(|r| r.filter_map(|e| e.ok()).map(|e| e.file_name()).collect()).unwrap_or_default();
        v.sort();
        v
    };
    let (la, lb) = (list(a), list(b));
    !la.is_empty() && la == lb && la.iter().all(|f| std::fs::read(a.join(f)).ok() == std::fs::read(b.join(f)).ok())
}

fn main() {
    let start = Instant::now();
    let c1 = zero_noise();
    let c1_pass = c1.pass;
    let verdicts = [
        (1, c1),
        (2, table2(c1_pass)),
        (3, table3()),
        (4, solver_oracles()),
        (5, rectifier_suite()),
        (6, resampler_suite()),
        (7, determinism()),
    ];
    let mut hard_failures = 0;
    for (n, v) in &verdicts {
        println!("criterion {n}: {} - {}", if v.pass { "PASS" } else { "FAIL" }, v.summary);
        for d in &v.details {
            println!("    {d}");
        }
        if !v.pass && v.hard {
            hard_failures += 1;
        }
    }
    let passed = verdicts.iter().filter(|(_, v)| v.pass).count();
    println!(
        "acceptance: {passed}/7 criteria pass, {hard_failures} blocking failures ({:.1} s)",
        start.elapsed().as_secs_f64()
    );
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
