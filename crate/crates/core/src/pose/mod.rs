//! Relative pose between two plenoptic cameras from LF-point
//! correspondences: constrained linear solve followed by refinement.

mod degeneracy;
mod dlt;
mod linear;
mod normalize;
mod refine;
mod translation;

pub use degeneracy::{detect_degeneracy, DegeneracyReport, COPLANAR_RELATIVE_RMS};
pub use dlt::{
    alpha, build_dlt_system, constraint_matrix, reduce, unvec_row_major, vec_row_major,
};
pub use linear::{project_to_so3, solve_linear, ProjectiveSolution};
pub use normalize::{normalize_points, NormalizationTransform};
pub use refine::{
    jacobian, refine_pose, refine_pose_with, reprojection_cost, residuals, retract, RefineOptions,
    RefineOutcome, RefineStep, StopReason,
};
pub use translation::{solve_translation, translation_system, vec_col_major};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{LFIntrinsics, LFPoint, RelativePose};

/// Minimum number of correspondences: 13 unknowns up to scale, three
/// independent equations per pair.
pub const MIN_CORRESPONDENCES: usize = 4;

/// Matched LF-points (camera 1, camera 2) with both cameras' intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pairs: Vec<(LFPoint, LFPoint)>,
    intrinsics: (LFIntrinsics, LFIntrinsics),
}

impl CorrespondenceSet {
    pub fn new(pairs: Vec<(LFPoint, LFPoint)>, k: LFIntrinsics, k_prime: LFIntrinsics) -> Result<Self> {
        k.validate()?;
        k_prime.validate()?;
        if pairs.len() < MIN_CORRESPONDENCES {
            return Err(Error::InvalidCorrespondences(format!(
                "need at least {MIN_CORRESPONDENCES} pairs, got {}",
                pairs.len()
            )));
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        for (i, (a, b)) in pairs.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidCorrespondences(format!("pair {i} is not finite")));
            }
            let key = [a.u_c, a.v_c, a.lambda, b.u_c, b.v_c, b.lambda].map(f64::to_bits);
            if !seen.insert(key) {
                return Err(Error::InvalidCorrespondences(format!("pair {i} is a duplicate")));
            }
        }
        Ok(Self { pairs, intrinsics: (k, k_prime) })
    }

    pub fn pairs(&self) -> &[(LFPoint, LFPoint)] {
        &self.pairs
    }

    pub fn intrinsics(&self) -> (&LFIntrinsics, &LFIntrinsics) {
        (&self.intrinsics.0, &self.intrinsics.1)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub refine: bool,
    pub refine_options: RefineOptions,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { refine: true, refine_options: RefineOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PoseEstimate {
    /// Final pose (refined unless refinement was disabled).
    pub pose: RelativePose,
    /// Pose from the linear solve, before refinement.
    pub linear_pose: RelativePose,
    pub linear_cost: f64,
    pub solution: ProjectiveSolution,
    pub degeneracy: DegeneracyReport,
    pub refinement: Option<RefineOutcome>,
}

impl PoseEstimate {
    pub fn final_cost(&self) -> f64 {
        self.refinement.as_ref().map_or(self.linear_cost, |r| r.final_cost)
    }
}

pub fn estimate_pose(corr: &CorrespondenceSet) -> Result<PoseEstimate> {
    estimate_pose_with(corr, &EstimateOptions::default())
}

/// normalize, build `A`, constrain, SVD, de-normalize, project the rotation,
/// solve the translation, refine.
pub fn estimate_pose_with(corr: &CorrespondenceSet, opts: &EstimateOptions) -> Result<PoseEstimate> {
    let degeneracy = detect_degeneracy(corr);
    if degeneracy.coplanar {
        return Err(Error::CoplanarDegeneracy {
            normal: degeneracy.plane_normal,
            distance: degeneracy.plane_distance,
            rms: degeneracy.residual_rms,
        });
    }
    let solution = solve_linear(corr)?;
    let block = solution.rigid_block.fixed_view::<3, 3>(0, 0).into_owned();
    let rotation = project_to_so3(&block)?;
    let translation = solve_translation(corr, &rotation)?;
    let linear_pose = RelativePose::new(rotation, translation)?;
    let linear_cost = reprojection_cost(corr, &linear_pose);

    let (pose, refinement) = if opts.refine {
        let outcome = refine_pose_with(corr, &linear_pose, &opts.refine_options)?;
        (outcome.pose, Some(outcome))
    } else {
        (linear_pose, None)
    };
    Ok(PoseEstimate { pose, linear_pose, linear_cost, solution, degeneracy, refinement })
}
