use alloc::vec;
use alloc::vec::Vec;

use super::{LinalgError, Matrix, SymMatrix};
use crate::math;

/// Dense Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // lower triangle, row-major
    l: Vec<f64>,
}

/// Factors a symmetric matrix, failing with the index of the first non-positive pivot.
pub fn cholesky(a: &SymMatrix) -> Result<Cholesky, LinalgError> {
    Cholesky::factor(a)
}

impl Cholesky {
    pub fn factor(a: &SymMatrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j });
            }
            let djj = math::sqrt(d);
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The lower-triangular factor as a dense matrix.
    pub fn l(&self) -> Matrix {
        Matrix::from_row_major(self.n, self.n, self.l.clone()).expect("square storage")
    }

    /// Solves `L y = b` in place.
    pub fn forward_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward_in_place(&self, y: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let yi = y[i] / self.l[i * n + i];
            y[i] = yi;
            for k in 0..i {
                y[k] -= self.l[i * n + k] * yi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        x
    }

    /// `L⁻¹ A L⁻ᵀ` for a symmetric `A`, symmetrized.
    pub fn congruence_inverse(&self, a: &SymMatrix) -> SymMatrix {
        let n = self.n;
        // W = L⁻¹ A, column by column of A (A symmetric so rows == columns)
        let mut w = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.copy_from_slice(a.row(j));
            self.forward_in_place(&mut col);
            for i in 0..n {
                w[i * n + j] = col[i];
            }
        }
        // C = W L⁻ᵀ = (L⁻¹ Wᵀ)ᵀ
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            col.copy_from_slice(&w[i * n..(i + 1) * n]);
            self.forward_in_place(&mut col);
            c[i * n..(i + 1) * n].copy_from_slice(&col);
        }
        SymMatrix::from_fn(n, |i, j| c[i * n + j])
    }

    /// Diagonal of `L`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.l[i * self.n + i]).collect()
    }
}
