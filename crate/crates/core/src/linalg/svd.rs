use alloc::vec;
use alloc::vec::Vec;

use super::{dot, LinalgError, Matrix};
use crate::math;

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Non-increasing singular values, `min(rows, cols)` of them.
    pub singular_values: Vec<f64>,
    /// `rows × k`; columns belonging to zero singular values are zero, and
    /// those belonging to values below `ε‖A‖_F` are not orthogonalized.
    pub left_vectors: Matrix,
    /// `cols × k`.
    pub right_vectors: Matrix,
}

impl SvdResult {
    /// `Σ_{i<r} σ_i u_i v_iᵀ`
    pub fn reconstruct(&self, r: usize) -> Matrix {
        let (m, n) = (self.left_vectors.rows(), self.right_vectors.rows());
        let mut out = Matrix::zeros(m, n);
        for k in 0..r.min(self.singular_values.len()) {
            let s = self.singular_values[k];
            for i in 0..m {
                let us = s * self.left_vectors[(i, k)];
                for j in 0..n {
                    out[(i, j)] += us * self.right_vectors[(j, k)];
                }
            }
        }
        out
    }
}

/// One-sided Jacobi (Hestenes) SVD. `tol` bounds the cosine between any two
/// orthogonalized columns at convergence.
pub fn svd(a: &Matrix, tol: f64) -> Result<SvdResult, LinalgError> {
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument("tolerance must be positive"));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::InvalidArgument("non-finite matrix entry"));
    }
    if a.rows() >= a.cols() {
        svd_tall(a, tol)
    } else {
        let r = svd_tall(&a.transpose(), tol)?;
        Ok(SvdResult {
            singular_values: r.singular_values,
            left_vectors: r.right_vectors,
            right_vectors: r.left_vectors,
        })
    }
}

fn svd_tall(a: &Matrix, tol: f64) -> Result<SvdResult, LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    // columns stored contiguously
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let threshold = tol.min(m as f64 * f64::EPSILON).max(f64::EPSILON);
    // columns this small are rounding residue of a rank-deficient input
    let fro = a.frobenius_norm();
    let negligible = (f64::EPSILON * fro) * (f64::EPSILON * fro);

    let mut converged = n <= 1;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&w[p], &w[q]);
                let cosine = gamma.abs() / (math::sqrt(alpha) * math::sqrt(beta));
                worst = worst.max(cosine);
                if cosine <= threshold {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { method: "svd", off_norm: worst });
    }

    let sigma: Vec<f64> = w.iter().map(|c| math::sqrt(dot(c, c))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let s = sigma[src];
        values.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[src][i] / s;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[src][i];
        }
    }
    Ok(SvdResult { singular_values: values, left_vectors: u, right_vectors: vm })
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (x, y) = (&mut lo[p], &mut hi[0]);
    for (xp, yq) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xp;
        let b = *yq;
        *xp = c * a - s * b;
        *yq = s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_TOL;

    #[test]
    fn frobenius_identity_two_by_two() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let r = svd(&a, DEFAULT_TOL).unwrap();
        let s2: f64 = r.singular_values.iter().map(|s| s * s).sum();
        assert!((s2 - 30.0).abs() < 1e-12);
        assert!(r.singular_values[0] >= r.singular_values[1]);
        assert!(r.reconstruct(2).sub(&a).frobenius_norm() < 1e-13);
    }

    #[test]
    fn rank_one_outer_product() {
        let b = [0.6, 0.8];
        let c = [1.0 / 3.0_f64.sqrt(); 3];
        let a = Matrix::from_fn(2, 3, |i, j| b[i] * c[j]);
        let r = svd(&a, DEFAULT_TOL).unwrap();
        assert!((r.singular_values[0] - a.frobenius_norm()).abs() < 1e-15);
        assert!(r.singular_values[1].abs() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let r = svd(&Matrix::zeros(3, 2), DEFAULT_TOL).unwrap();
        assert_eq!(r.singular_values, [0.0, 0.0]);
    }

    #[test]
    fn wide_matrix_reconstructs() {
        let a = Matrix::from_rows(&[&[1.0, 0.0, 2.0, -1.0], &[0.5, 3.0, 0.0, 1.0]]);
        let r = svd(&a, DEFAULT_TOL).unwrap();
        assert_eq!(r.left_vectors.rows(), 2);
        assert_eq!(r.right_vectors.rows(), 4);
        assert!(r.reconstruct(2).sub(&a).frobenius_norm() < 1e-13);
    }
}
