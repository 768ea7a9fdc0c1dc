use nalgebra::{DMatrix, DVector, Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use super::dlt::{build_dlt_system, constraint_matrix, unvec_row_major};
use super::normalize::{normalize_points, NormalizationTransform};
use super::CorrespondenceSet;
use crate::error::{Error, Result};

/// Two smallest singular values closer than this ratio leave the null vector
/// ambiguous.
const NULL_SPACE_RATIO: f64 = 1.0 - 1e-6;
/// Second-smallest singular value below this fraction of the largest means
/// the constrained system has a null space of dimension two or more.
const NULL_SPACE_FLOOR: f64 = 1e-10;

/// Output of the constrained linear solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveSolution {
    /// Transform between normalized LF-points, unit Frobenius norm.
    pub w_prime: Matrix4<f64>,
    /// `N'^-1 W' N`, the transform between raw LF-points (up to scale).
    pub w: Matrix4<f64>,
    /// `H'^-1 W H` divided by its (4,4) entry: the candidate `[R T; 0 1]`.
    pub rigid_block: Matrix4<f64>,
    /// Scale removed from the rigid block (`1 / c`).
    pub mu: f64,
    /// (4,4) entry of `H'^-1 W H` before rescaling.
    pub c: f64,
    /// Spectrum of `A Q`, descending.
    pub singular_values: Vec<f64>,
    pub norm: NormalizationTransform,
    pub norm_prime: NormalizationTransform,
}

/// Right singular vector of the smallest singular value plus the full
/// spectrum in descending order.
pub(crate) fn null_vector(m: &DMatrix<f64>) -> Result<(DVector<f64>, Vec<f64>)> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NonFinite("singular value decomposition"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let spectrum: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smallest = *order.last().unwrap();
    Ok((v_t.row(smallest).transpose(), spectrum))
}

/// Solves `A Q vec(W'_13) = 0` and de-normalizes the result.
///
/// Coplanarity is not checked here; [`super::estimate_pose`] runs
/// [`super::detect_degeneracy`] first.
pub fn solve_linear(corr: &CorrespondenceSet) -> Result<ProjectiveSolution> {
    let (k, k_prime) = corr.intrinsics();
    let (first, second): (Vec<_>, Vec<_>) = corr.pairs().iter().copied().unzip();
    let (_, norm) = normalize_points(&first)?;
    let (_, norm_prime) = normalize_points(&second)?;

    let a = build_dlt_system(corr, &norm, &norm_prime);
    let q = constraint_matrix(k, k_prime, &norm, &norm_prime);
    let aq = &a * q;
    let (reduced, spectrum) = null_vector(&DMatrix::from_column_slice(aq.nrows(), 13, aq.as_slice()))?;

    let n = spectrum.len();
    let (smallest, second_smallest) = (spectrum[n - 1], spectrum[n - 2]);
    if second_smallest <= NULL_SPACE_FLOOR * spectrum[0]
        || smallest / second_smallest > NULL_SPACE_RATIO
    {
        return Err(Error::RankDeficient { smallest, second: second_smallest });
    }

    let full = q * reduced;
    let full = &full / full.norm();
    let w_prime = unvec_row_major(full.as_slice());
    let w = norm_prime.inverse_matrix() * w_prime * norm.matrix();
    let g = k_prime.matrix_h_inverse() * w * k.matrix_h();
    let c = g[(3, 3)];
    if !(c.abs() > f64::MIN_POSITIVE) || !c.is_finite() {
        return Err(Error::RankDeficient { smallest, second: second_smallest });
    }
    let mut rigid_block = g / c;
    if rigid_block.fixed_view::<3, 3>(0, 0).determinant() < 0.0 {
        for r in 0..3 {
            for col in 0..4 {
                rigid_block[(r, col)] = -rigid_block[(r, col)];
            }
        }
    }

    Ok(ProjectiveSolution {
        w_prime,
        w,
        rigid_block,
        mu: 1.0 / c,
        c,
        singular_values: spectrum,
        norm,
        norm_prime,
    })
}

/// Closest rotation to `m` in the Frobenius sense.
pub fn project_to_so3(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix to project"));
    }
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = svd.singular_values;
    let imin = s.imin();
    if s[imin] < 1e-12 {
        return Err(Error::SingularInput(s[imin]));
    }
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(imin, imin)] = -1.0;
    }
    Ok(u * d * v_t)
}
