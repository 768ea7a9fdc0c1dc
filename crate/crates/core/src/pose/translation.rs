use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::CorrespondenceSet;
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e12;

/// Coefficients `(A_R, A_T)` of the homogeneous system
/// `A_R vec(R) + A_T T = 0`, with `vec(R)` stacking columns.
///
/// Each correspondence contributes the three cross-product rows of
/// `P' ~ H' [R T; 0 1] H^-1 P` that do not involve the disparity row of `H'`
/// (that row carries a constant term and would make the system
/// inhomogeneous).
pub fn translation_system(corr: &CorrespondenceSet) -> (DMatrix<f64>, DMatrix<f64>) {
    let (k, kp) = corr.intrinsics();
    let h_inv = k.matrix_h_inverse();
    let n = corr.len();
    let mut a_r = DMatrix::zeros(3 * n, 9);
    let mut a_t = DMatrix::zeros(3 * n, 3);

    for (idx, (p, pp)) in corr.pairs().iter().enumerate() {
        let q = h_inv * p.homogeneous();
        let dir = Vector3::new(q[0], q[1], q[2]);
        let inv_depth = q[3];
        let (u, v) = (pp.u_c, pp.v_c);
        // Row coefficients acting on n = R dir + inv_depth * T.
        let rows = [
            Vector3::new(-v * kp.fx, u * kp.fy, u * kp.cy - v * kp.cx),
            Vector3::new(-kp.fx, 0.0, u - kp.cx),
            Vector3::new(0.0, -kp.fy, v - kp.cy),
        ];
        for (e, coeff) in rows.iter().enumerate() {
            let row = 3 * idx + e;
            for r in 0..3 {
                for c in 0..3 {
                    a_r[(row, 3 * c + r)] = coeff[r] * dir[c];
                }
                a_t[(row, r)] = inv_depth * coeff[r];
            }
        }
    }
    (a_r, a_t)
}

pub fn vec_col_major(r: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_column_slice(r.as_slice())
}

/// Least-squares translation for a known rotation: `T = -A_T^+ A_R vec(R)`.
///
/// Rows are scaled to unit norm first so the result does not depend on the
/// units of the image coordinates.
pub fn solve_translation(corr: &CorrespondenceSet, r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let (a_r, mut a_t) = translation_system(corr);
    let mut rhs = -(a_r * vec_col_major(r));
    for i in 0..a_t.nrows() {
        let n = a_t.row(i).norm();
        if n > 0.0 {
            a_t.row_mut(i).unscale_mut(n);
            rhs[i] /= n;
        }
    }
    let svd = a_t.svd(true, true);
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let x = svd
        .solve(&rhs, 0.0)
        .map_err(|_| Error::NonFinite("translation solve"))?;
    Ok(Vector3::new(x[0], x[1], x[2]))
}
