//! Levenberg-Marquardt refinement of `(R, T)` on the reprojection error of
//! the second camera's LF-points.
//!
//! Rotation steps are applied on the left through the exponential map,
//! `R <- exp([d]x) R`; translation steps are additive.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Rotation3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::CorrespondenceSet;
use crate::error::{Error, Result};
use crate::geometry::RelativePose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub initial_damping: f64,
    pub damping_factor: f64,
    pub max_iterations: usize,
    pub relative_cost_tol: f64,
    pub gradient_tol: f64,
    /// Costs at or below this (px^2) are exact fits up to round-off.
    pub cost_floor: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_factor: 10.0,
            max_iterations: 100,
            relative_cost_tol: 1e-12,
            gradient_tol: 1e-10,
            cost_floor: 1e-18,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineStep {
    pub iteration: usize,
    /// Cost after this iteration (unchanged when the step was rejected).
    pub cost: f64,
    pub damping: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    Gradient,
    RelativeCost,
    CostFloor,
    MaxIterations,
    DampingOverflow,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub pose: RelativePose,
    /// Sum of squared LF-point residuals, px^2.
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<RefineStep>,
}

impl RefineOutcome {
    pub fn converged(&self) -> bool {
        matches!(self.stop, StopReason::Gradient | StopReason::RelativeCost | StopReason::CostFloor)
    }
}

/// Camera-1 LF-point lifted by `H^-1`: viewing direction `[x/z, y/z, 1]` and
/// inverse depth.
struct Lifted {
    dir: Vector3<f64>,
    inv_depth: f64,
    observed: Vector3<f64>,
}

fn lift(corr: &CorrespondenceSet) -> Vec<Lifted> {
    let h_inv = corr.intrinsics().0.matrix_h_inverse();
    corr.pairs()
        .iter()
        .map(|(p, pp)| {
            let q = h_inv * p.homogeneous();
            Lifted {
                dir: Vector3::new(q[0], q[1], q[2]),
                inv_depth: q[3],
                observed: pp.as_vector(),
            }
        })
        .collect()
}

/// Applies a 6-vector step `[d_rot; d_t]` to a pose.
pub fn retract(pose: &RelativePose, delta: &Vector6<f64>) -> RelativePose {
    let w = Vector3::new(delta[0], delta[1], delta[2]);
    let dr = Rotation3::new(w).into_inner();
    let r = dr * pose.rotation();
    let t = pose.translation() + Vector3::new(delta[3], delta[4], delta[5]);
    // exp of a finite vector composed with a rotation stays a rotation
    RelativePose::new(r, t).unwrap_or_else(|_| {
        let r = super::linear::project_to_so3(&r).unwrap_or(Matrix3::identity());
        RelativePose::new(r, t).unwrap_or(*pose)
    })
}

fn predict(kp: &crate::geometry::LFIntrinsics, m: &Vector3<f64>, inv_depth: f64) -> Vector3<f64> {
    Vector3::new(
        kp.fx * m[0] / m[2] + kp.cx,
        kp.fy * m[1] / m[2] + kp.cy,
        -kp.k1 - kp.k2 * inv_depth / m[2],
    )
}

fn residuals_lifted(corr: &CorrespondenceSet, lifted: &[Lifted], pose: &RelativePose) -> DVector<f64> {
    let kp = &corr.intrinsics().1;
    let mut r = DVector::zeros(3 * lifted.len());
    for (i, l) in lifted.iter().enumerate() {
        let m = pose.rotation() * l.dir + l.inv_depth * pose.translation();
        let e = predict(kp, &m, l.inv_depth) - l.observed;
        r.fixed_rows_mut::<3>(3 * i).copy_from(&e);
    }
    r
}

/// Stacked residuals `predicted - observed` for every camera-2 LF-point,
/// three per correspondence.
pub fn residuals(corr: &CorrespondenceSet, pose: &RelativePose) -> DVector<f64> {
    residuals_lifted(corr, &lift(corr), pose)
}

/// Sum of squared residuals in px^2.
pub fn reprojection_cost(corr: &CorrespondenceSet, pose: &RelativePose) -> f64 {
    residuals(corr, pose).norm_squared()
}

fn jacobian_lifted(corr: &CorrespondenceSet, lifted: &[Lifted], pose: &RelativePose) -> DMatrix<f64> {
    let kp = &corr.intrinsics().1;
    let mut j = DMatrix::zeros(3 * lifted.len(), 6);
    for (i, l) in lifted.iter().enumerate() {
        let rotated = pose.rotation() * l.dir;
        let m = rotated + l.inv_depth * pose.translation();
        let iz = 1.0 / m[2];
        let iz2 = iz * iz;
        // d(prediction) / d(m)
        let dp_dm = Matrix3::new(
            kp.fx * iz, 0.0, -kp.fx * m[0] * iz2, //
            0.0, kp.fy * iz, -kp.fy * m[1] * iz2, //
            0.0, 0.0, kp.k2 * l.inv_depth * iz2,
        );
        // d(m) / d(rotation step) = -[R dir]x
        let dm_drot = -rotated.cross_matrix();
        let block_rot = dp_dm * dm_drot;
        let block_t = dp_dm * l.inv_depth;
        j.view_mut((3 * i, 0), (3, 3)).copy_from(&block_rot);
        j.view_mut((3 * i, 3), (3, 3)).copy_from(&block_t);
    }
    j
}

/// Analytic Jacobian of [`residuals`] with respect to the step of [`retract`].
pub fn jacobian(corr: &CorrespondenceSet, pose: &RelativePose) -> DMatrix<f64> {
    jacobian_lifted(corr, &lift(corr), pose)
}

pub fn refine_pose(corr: &CorrespondenceSet, init: &RelativePose) -> Result<RefineOutcome> {
    refine_pose_with(corr, init, &RefineOptions::default())
}

pub fn refine_pose_with(
    corr: &CorrespondenceSet,
    init: &RelativePose,
    opts: &RefineOptions,
) -> Result<RefineOutcome> {
    let lifted = lift(corr);
    let mut pose = *init;
    let mut r = residuals_lifted(corr, &lifted, &pose);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::NumericalFailure);
    }
    let initial_cost = cost;
    let mut jac = jacobian_lifted(corr, &lifted, &pose);
    let mut grad: Vector6<f64> = Vector6::from_iterator((jac.transpose() * &r).iter().copied());
    let mut damping = opts.initial_damping;
    let mut trace = Vec::new();
    let mut iterations = 0;

    let stop = 'outer: {
        if cost <= opts.cost_floor {
            break 'outer StopReason::CostFloor;
        }
        if grad.amax() < opts.gradient_tol {
            break 'outer StopReason::Gradient;
        }
        while iterations < opts.max_iterations {
            iterations += 1;
            let jtj: Matrix6<f64> = Matrix6::from_iterator((jac.transpose() * &jac).iter().copied());
            let mut lhs = jtj;
            for d in 0..6 {
                lhs[(d, d)] += damping * jtj[(d, d)].max(1e-12);
            }
            let step = lhs.cholesky().map(|c| c.solve(&(-grad)));
            let candidate = step.map(|s| retract(&pose, &s));
            let new = candidate.map(|p| {
                let res = residuals_lifted(corr, &lifted, &p);
                let c = res.norm_squared();
                (p, res, c)
            });
            match new {
                Some((p, res, c)) if c.is_finite() && c <= cost => {
                    let decrease = (cost - c) / cost;
                    pose = p;
                    r = res;
                    cost = c;
                    damping /= opts.damping_factor;
                    jac = jacobian_lifted(corr, &lifted, &pose);
                    grad = Vector6::from_iterator((jac.transpose() * &r).iter().copied());
                    trace.push(RefineStep { iteration: iterations, cost, damping, accepted: true });
                    if cost <= opts.cost_floor {
                        break 'outer StopReason::CostFloor;
                    }
                    if grad.amax() < opts.gradient_tol {
                        break 'outer StopReason::Gradient;
                    }
                    if decrease < opts.relative_cost_tol {
                        break 'outer StopReason::RelativeCost;
                    }
                }
                _ => {
                    damping *= opts.damping_factor;
                    trace.push(RefineStep { iteration: iterations, cost, damping, accepted: false });
                    if damping > 1e32 {
                        break 'outer StopReason::DampingOverflow;
                    }
                }
            }
        }
        StopReason::MaxIterations
    };

    if !cost.is_finite() {
        return Err(Error::NumericalFailure);
    }
    Ok(RefineOutcome { pose, initial_cost, final_cost: cost, iterations, stop, trace })
}
