//! Symmetric-definite generalized eigenproblems `A u = λ B u`.

mod bounds;

use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{cholesky, sym_eig, sym_eigvals, Cholesky, LinalgError, MassOperator, Matrix, SymMatrix, DEFAULT_DENSE_CAP};
use crate::math;

pub use bounds::{
    bauer_fike_bounds, ratio_bounds, sandwich_bounds, BoundEntry, BoundReport, BAUER_FIKE_A, BAUER_FIKE_B,
    CRAWFORD, RATIO, SANDWICH_A, SANDWICH_B,
};

/// Relative tolerance for comparing eigenvalues of reduced pencils.
pub const EIG_COMPARE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PencilError {
    Linalg(LinalgError),
    DimensionMismatch { a: usize, b: usize },
    /// `B` failed Cholesky at `pivot` and the pencil is regular.
    NotPositiveDefinite { pivot: usize },
    /// `A` and `B` share a (near) null vector; `residual` is `min ‖Ax‖² + ‖Bx‖²` over unit `x`.
    SingularPencil { residual: f64 },
}

impl fmt::Display for PencilError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PencilError::Linalg(e) => write!(f, "{e}"),
            PencilError::DimensionMismatch { a, b } => {
                write!(f, "pencil operands differ in size ({a} vs {b})")
            }
            PencilError::NotPositiveDefinite { pivot } => {
                write!(f, "right-hand matrix is not positive definite (pivot {pivot})")
            }
            PencilError::SingularPencil { residual } => {
                write!(f, "singular pencil: shared null vector (residual {residual:e})")
            }
        }
    }
}

impl core::error::Error for PencilError {}

impl From<LinalgError> for PencilError {
    fn from(e: LinalgError) -> Self {
        PencilError::Linalg(e)
    }
}

/// The pair `(A, B)`. Definiteness of `B` is decided once, on construction.
#[derive(Debug, Clone)]
pub struct Pencil {
    a: SymMatrix,
    b: SymMatrix,
    chol: Option<Cholesky>,
}

impl Pencil {
    pub fn new(a: SymMatrix, b: SymMatrix) -> Result<Self, PencilError> {
        if a.dim() != b.dim() {
            return Err(PencilError::DimensionMismatch { a: a.dim(), b: b.dim() });
        }
        let chol = cholesky(&b).ok();
        Ok(Pencil { a, b, chol })
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn b_definite(&self) -> bool {
        self.chol.is_some()
    }

    fn factor(&self) -> Result<&Cholesky, PencilError> {
        match &self.chol {
            Some(c) => Ok(c),
            None => Err(self.definiteness_error()),
        }
    }

    fn definiteness_error(&self) -> PencilError {
        let pivot = match cholesky(&self.b) {
            Err(LinalgError::NotPositiveDefinite { pivot }) => pivot,
            _ => 0,
        };
        match singular_residual(&self.a, &self.b) {
            Some(residual) => PencilError::SingularPencil { residual },
            None => PencilError::NotPositiveDefinite { pivot },
        }
    }
}

/// Returns the residual when `A² + B²` is numerically singular.
fn singular_residual(a: &SymMatrix, b: &SymMatrix) -> Option<f64> {
    let a2 = a.to_matrix().matmul(&a.to_matrix()).ok()?;
    let b2 = b.to_matrix().matmul(&b.to_matrix()).ok()?;
    let s = SymMatrix::from_fn(a.dim(), |i, j| a2[(i, j)] + b2[(i, j)]);
    let lo = sym_eigvals(&s).ok()?[0];
    let (fa, fb) = (a.frobenius_norm(), b.frobenius_norm());
    let scale = fa * fa + fb * fb;
    if lo.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        Some(lo.max(0.0))
    } else {
        None
    }
}

/// Generalized eigenpairs with `B`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct GenEigResult {
    /// Ascending `λ_k(A, B)`.
    pub values: Vec<f64>,
    /// Column `k` is `u_k` with `UᵀBU = I`.
    pub vectors: Matrix,
}

impl GenEigResult {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Solves the pencil by reducing `L⁻¹ A L⁻ᵀ` with `B = L Lᵀ`.
pub fn gen_eig(p: &Pencil, tol: f64) -> Result<GenEigResult, PencilError> {
    let l = p.factor()?;
    let c = l.congruence_inverse(&p.a);
    let eig = sym_eig(&c, tol)?;
    let n = p.dim();
    let mut vectors = Matrix::zeros(n, n);
    for k in 0..n {
        let mut w = eig.vectors.column(k);
        l.backward_in_place(&mut w);
        vectors.set_column(k, &w);
    }
    Ok(GenEigResult { values: eig.values, vectors })
}

/// Ascending `λ_k(A, B)` without eigenvectors.
pub fn gen_eigvals(a: &SymMatrix, b: &SymMatrix) -> Result<Vec<f64>, PencilError> {
    let p = Pencil::new(a.clone(), b.clone())?;
    let l = p.factor()?;
    Ok(sym_eigvals(&l.congruence_inverse(&p.a))?)
}

/// `λ_k(A, B)` for a mass-like operator `B`, expanded to dense form.
pub fn gen_eigvals_op(a: &SymMatrix, b: &MassOperator) -> Result<Vec<f64>, PencilError> {
    if a.dim() != b.dim() {
        return Err(PencilError::DimensionMismatch { a: a.dim(), b: b.dim() });
    }
    gen_eigvals(a, &b.to_sym(DEFAULT_DENSE_CAP)?)
}

/// Outcome of comparing two symmetric matrices in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoewnerOrder {
    Equal,
    /// `X ⪰ Y`
    Greater,
    /// `Y ⪰ X`
    Less,
    Indefinite,
}

/// Classifies `X − Y` by the signs of its eigenvalues within `±tol‖X − Y‖_F`.
pub fn loewner_compare(x: &SymMatrix, y: &SymMatrix, tol: f64) -> Result<LoewnerOrder, PencilError> {
    if x.dim() != y.dim() {
        return Err(PencilError::DimensionMismatch { a: x.dim(), b: y.dim() });
    }
    let d = x.sub(y);
    let fro = d.frobenius_norm();
    if fro <= tol * x.frobenius_norm().max(1.0) {
        return Ok(LoewnerOrder::Equal);
    }
    let vals = sym_eigvals(&d)?;
    let band = tol * fro;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    Ok(if lo >= -band {
        LoewnerOrder::Greater
    } else if hi <= band {
        LoewnerOrder::Less
    } else {
        LoewnerOrder::Indefinite
    })
}

/// `θ_i = arccot(λ_i) ∈ (0, π)`.
pub fn eigenangles(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&l| math::atan2(1.0, l)).collect()
}

/// `Δt_c = 2 / √λ_n(K, M)`.
pub fn critical_dt(k: &SymMatrix, m: &MassOperator) -> Result<f64, PencilError> {
    let vals = gen_eigvals_op(k, m)?;
    let top = vals[vals.len() - 1];
    if !(top > 0.0) {
        return Err(PencilError::NotPositiveDefinite { pivot: vals.len() - 1 });
    }
    Ok(2.0 / math::sqrt(top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_TOL;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn identity_b_reduces_to_standard() {
        let a = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = gen_eig(&Pencil::new(a, SymMatrix::identity(2)).unwrap(), DEFAULT_TOL).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-15 && (r.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_pencil_detected() {
        let a = SymMatrix::from_diag(&[1.0, 0.0]);
        let b = SymMatrix::from_diag(&[1.0, 0.0]);
        let err = gen_eig(&Pencil::new(a, b).unwrap(), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, PencilError::SingularPencil { .. }));
    }

    #[test]
    fn indefinite_b_rejected() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let err = gen_eig(&Pencil::new(a, b).unwrap(), DEFAULT_TOL).unwrap_err();
        assert_eq!(err, PencilError::NotPositiveDefinite { pivot: 1 });
    }

    #[test]
    fn angles() {
        let t = eigenangles(&[1.0, 0.0, 3.0_f64.sqrt()]);
        assert!((t[0] - FRAC_PI_4).abs() < 1e-15);
        assert!((t[1] - FRAC_PI_2).abs() < 1e-15);
        assert!((t[2] - FRAC_PI_6).abs() < 1e-15);
    }

    #[test]
    fn critical_step_of_scaled_identity() {
        let m = SymMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]);
        assert!((critical_dt(&m, &MassOperator::Dense(m.clone())).unwrap() - 2.0).abs() < 1e-14);
        let k = m.scaled(4.0);
        assert!((critical_dt(&k, &MassOperator::Dense(m)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn loewner_equal() {
        let x = SymMatrix::identity(3);
        assert_eq!(loewner_compare(&x, &x, 1e-12).unwrap(), LoewnerOrder::Equal);
        let y = x.scaled(2.0);
        assert_eq!(loewner_compare(&y, &x, 1e-12).unwrap(), LoewnerOrder::Greater);
        assert_eq!(loewner_compare(&x, &y, 1e-12).unwrap(), LoewnerOrder::Less);
    }
}
