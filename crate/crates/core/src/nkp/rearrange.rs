use alloc::vec::Vec;

use super::NkpError;
use crate::linalg::{Matrix, SymMatrix};

/// `R(M)` for `M` with `n₁ × n₁` blocks of size `n₂ × n₂`.
///
/// Row `j n₁ + i` is `vec(A_{i,j})ᵀ` (column-major vec of block `(i, j)`),
/// so `R(B ⊗ C) = vec(B) vec(C)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearranged {
    pub n1: usize,
    pub n2: usize,
    pub matrix: Matrix,
}

pub fn rearrange(m: &SymMatrix, n1: usize, n2: usize) -> Result<Rearranged, NkpError> {
    rearrange_with(m.dim(), n1, n2, |r, c| m.get(r, c))
}

/// [`rearrange`] for a square matrix without symmetry.
pub fn rearrange_general(m: &Matrix, n1: usize, n2: usize) -> Result<Rearranged, NkpError> {
    if m.rows() != m.cols() {
        return Err(NkpError::DimensionMismatch { expected: m.rows(), got: m.cols() });
    }
    rearrange_with(m.rows(), n1, n2, |r, c| m[(r, c)])
}

fn rearrange_with(n: usize, n1: usize, n2: usize, m: impl Fn(usize, usize) -> f64) -> Result<Rearranged, NkpError> {
    if n1 * n2 != n {
        return Err(NkpError::DimensionMismatch { expected: n1 * n2, got: n });
    }
    let matrix = Matrix::from_fn(n1 * n1, n2 * n2, |row, col| {
        let (j, i) = (row / n1, row % n1);
        let (l, k) = (col / n2, col % n2);
        m(i * n2 + k, j * n2 + l)
    });
    Ok(Rearranged { n1, n2, matrix })
}

impl Rearranged {
    /// Inverse map back to the full matrix. Entries are copied, not averaged.
    pub fn to_full(&self) -> Matrix {
        let (n1, n2) = (self.n1, self.n2);
        let n = n1 * n2;
        Matrix::from_fn(n, n, |r, c| {
            let (i, k) = (r / n2, r % n2);
            let (j, l) = (c / n2, c % n2);
            self.matrix[(j * n1 + i, l * n2 + k)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    /// Rows and columns of `R(M)` holding a nonzero entry.
    pub fn nonzero_support(&self) -> (Vec<usize>, Vec<usize>) {
        let a = &self.matrix;
        let rows = (0..a.rows()).filter(|&r| a.row(r).iter().any(|&v| v != 0.0)).collect();
        let cols = (0..a.cols()).filter(|&c| (0..a.rows()).any(|r| a[(r, c)] != 0.0)).collect();
        (rows, cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_becomes_outer_product() {
        let b = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let c = Matrix::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let m = Matrix::from_fn(4, 4, |i, j| b[(i / 2, j / 2)] * c[(i % 2, j % 2)]);
        let r = rearrange_general(&m, 2, 2).unwrap();
        let (vb, vc) = ([1.0, 3.0, 2.0, 4.0], [5.0, 7.0, 6.0, 8.0]);
        assert_eq!(r.matrix, Matrix::from_fn(4, 4, |i, j| vb[i] * vc[j]));
        assert_eq!(r.to_full(), m);
    }

    #[test]
    fn round_trip_and_norm() {
        let m = SymMatrix::from_fn(6, |i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64));
        let r = rearrange(&m, 2, 3).unwrap();
        assert_eq!(r.to_full(), m.to_matrix());
        assert!((r.frobenius_norm() - m.frobenius_norm()).abs() < 1e-15);
        assert!(rearrange(&m, 4, 2).is_err());
    }

    #[test]
    fn support_of_banded_input() {
        let m = SymMatrix::from_fn(9, |i, j| if i.abs_diff(j) <= 1 { 1.0 } else { 0.0 });
        let r = rearrange(&m, 3, 3).unwrap();
        let (rows, _) = r.nonzero_support();
        // block pairs (i, j) with |i - j| <= 1
        assert_eq!(rows.len(), 7);
    }
}
