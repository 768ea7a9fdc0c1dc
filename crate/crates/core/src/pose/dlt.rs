//! Design matrix of the projective LF-point relation and the linear
//! constraints that remove its redundant degrees of freedom.
//!
//! `vec(W)` stacks the 4x4 transform row by row: entry `(r, c)` sits at
//! index `4 * r + c`. The reduced 13-vector is
//! `[w1..w8, w13..w16, w0]` (1-based entry numbers).

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};

use super::normalize::NormalizationTransform;
use super::CorrespondenceSet;
use crate::geometry::LFIntrinsics;

/// Index pairs `(i, j)`, `i < j`, of the cross-product style equations.
pub(crate) const CROSS_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn vec_row_major(w: &Matrix4<f64>) -> DVector<f64> {
    DVector::from_iterator(16, (0..4).flat_map(|r| (0..4).map(move |c| w[(r, c)])))
}

pub fn unvec_row_major(v: &[f64]) -> Matrix4<f64> {
    assert_eq!(v.len(), 16);
    Matrix4::from_row_slice(v)
}

/// Builds `A` (6 rows per correspondence, 16 columns) such that
/// `A vec(W') = 0` for the transform `W'` between normalized LF-points.
pub fn build_dlt_system(
    corr: &CorrespondenceSet,
    norm: &NormalizationTransform,
    norm_prime: &NormalizationTransform,
) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(6 * corr.len(), 16);
    for (n, (p, pp)) in corr.pairs().iter().enumerate() {
        let x = norm.apply(p).homogeneous();
        let y = norm_prime.apply(pp).homogeneous();
        for (e, &(i, j)) in CROSS_PAIRS.iter().enumerate() {
            let row = 6 * n + e;
            // y_i (W x)_j - y_j (W x)_i
            for k in 0..4 {
                a[(row, 4 * j + k)] += y[i] * x[k];
                a[(row, 4 * i + k)] -= y[j] * x[k];
            }
        }
    }
    a
}

/// `alpha = x3 - K1 * v3` for one camera and its normalization.
pub fn alpha(k: &LFIntrinsics, norm: &NormalizationTransform) -> f64 {
    norm.offset[2] - k.k1 * norm.scale[2]
}

/// The 16x13 matrix `Q` with `vec(W'_16) = Q vec(W'_13)`.
///
/// Encodes `w9 = a' w13`, `w10 = a' w14`, `w11 = a' w15 - w0` and
/// `w12 = a' w16 + a w0`, where `a' = alpha(camera 2)` and
/// `a = alpha(camera 1)`.
pub fn constraint_matrix(
    k: &LFIntrinsics,
    k_prime: &LFIntrinsics,
    norm: &NormalizationTransform,
    norm_prime: &NormalizationTransform,
) -> SMatrix<f64, 16, 13> {
    let a = alpha(k, norm);
    let ap = alpha(k_prime, norm_prime);
    let mut q = SMatrix::<f64, 16, 13>::zeros();
    for i in 0..8 {
        q[(i, i)] = 1.0;
    }
    q[(8, 8)] = ap;
    q[(9, 9)] = ap;
    q[(10, 10)] = ap;
    q[(10, 12)] = -1.0;
    q[(11, 11)] = ap;
    q[(11, 12)] = a;
    for i in 0..4 {
        q[(12 + i, 8 + i)] = 1.0;
    }
    q
}

/// Extracts `[w1..w8, w13..w16, w0]` from a full transform, with
/// `w0 = a' w15 - w11`.
pub fn reduce(w: &Matrix4<f64>, alpha_prime: f64) -> DVector<f64> {
    let v = vec_row_major(w);
    let mut out = DVector::zeros(13);
    for i in 0..8 {
        out[i] = v[i];
    }
    for i in 0..4 {
        out[8 + i] = v[12 + i];
    }
    out[12] = alpha_prime * v[14] - v[10];
    out
}
