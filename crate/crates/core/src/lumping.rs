//! Row-sum lumping, the banded family `P_i = D_i + L(R_i)` and its Kronecker
//! extension `P_ij = P_{1,i} ⊗ P_{2,j}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{BandedSpd, Factor, KronOperator, LinalgError, MassOperator, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum LumpError {
    BandIndex { i: usize, n: usize },
    ZeroRow { row: usize },
    FactorCount(usize),
    Linalg(LinalgError),
}

impl fmt::Display for LumpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LumpError::BandIndex { i, n } => write!(f, "band index {i} outside 1..={n}"),
            LumpError::ZeroRow { row } => write!(f, "row {row} of the source matrix is zero"),
            LumpError::FactorCount(k) => write!(f, "expected 2 or 3 Kronecker factors, got {k}"),
            LumpError::Linalg(e) => write!(f, "lumped matrix is not positive definite: {e}"),
        }
    }
}

impl core::error::Error for LumpError {}

impl From<LinalgError> for LumpError {
    fn from(e: LinalgError) -> Self {
        LumpError::Linalg(e)
    }
}

/// `d_i = Σ_j |b_ij|`
pub fn row_abs_sums(b: &SymMatrix) -> Vec<f64> {
    (0..b.dim()).map(|i| b.row(i).iter().map(|v| v.abs()).sum()).collect()
}

/// Row-sum lumping operator `L(B)`.
pub fn lump(b: &SymMatrix) -> SymMatrix {
    SymMatrix::from_diag(&row_abs_sums(b))
}

/// `B = D_i + R_i` with `D_i` holding the offsets `< i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSplit {
    pub i: usize,
    pub d: SymMatrix,
    pub r: SymMatrix,
}

pub fn band_split(b: &SymMatrix, i: usize) -> Result<BandSplit, LumpError> {
    check_index(b.dim(), i)?;
    let near = |r: usize, c: usize| r.abs_diff(c) < i;
    let d = SymMatrix::from_fn(b.dim(), |r, c| if near(r, c) { b.get(r, c) } else { 0.0 });
    let r = SymMatrix::from_fn(b.dim(), |r, c| if near(r, c) { 0.0 } else { b.get(r, c) });
    Ok(BandSplit { i, d, r })
}

/// `P_i` stored in packed bands with bandwidth `i − 1`.
#[derive(Debug, Clone)]
pub struct LumpedMember {
    pub i: usize,
    pub p: BandedSpd,
}

impl LumpedMember {
    pub fn bandwidth(&self) -> usize {
        self.p.bandwidth()
    }
}

/// `P_i = D_i + L(R_i)`. The source should be SPD; zero rows are rejected.
pub fn make_pi(b: &SymMatrix, i: usize) -> Result<LumpedMember, LumpError> {
    let n = b.dim();
    check_index(n, i)?;
    if let Some(row) = (0..n).find(|&r| b.row(r).iter().all(|&v| v == 0.0)) {
        return Err(LumpError::ZeroRow { row });
    }
    let mut bands: Vec<Vec<f64>> = (0..i).map(|k| (0..n - k).map(|r| b.get(r, r + k)).collect()).collect();
    for r in 0..n {
        let far: f64 = b.row(r).iter().enumerate().filter(|(c, _)| r.abs_diff(*c) >= i).map(|(_, v)| v.abs()).sum();
        bands[0][r] += far;
    }
    Ok(LumpedMember { i, p: BandedSpd::from_bands(n, bands)? })
}

/// Every member `P_1, …, P_n`.
pub fn lumped_family(b: &SymMatrix) -> Result<Vec<LumpedMember>, LumpError> {
    (1..=b.dim()).map(|i| make_pi(b, i)).collect()
}

/// `P_{1,i₁} ⊗ P_{2,i₂} [⊗ P_{3,i₃}]`. Band indices are clamped to each factor's dimension.
pub fn make_pij(factors: &[SymMatrix], indices: &[usize]) -> Result<KronOperator, LumpError> {
    if !(2..=3).contains(&factors.len()) {
        return Err(LumpError::FactorCount(factors.len()));
    }
    if indices.len() != factors.len() {
        return Err(LinalgError::DimensionMismatch { expected: factors.len(), got: indices.len() }.into());
    }
    let members = factors
        .iter()
        .zip(indices)
        .map(|(f, &i)| make_pi(f, i.min(f.dim().max(1))).map(|m| Factor::Banded(m.p)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KronOperator::single(members)?)
}

/// Equal band index in every direction.
pub fn make_pii(factors: &[SymMatrix], i: usize) -> Result<KronOperator, LumpError> {
    make_pij(factors, &vec![i; factors.len()])
}

/// `I_d ⊗ P` for vector-valued problems.
pub fn vector_pde_wrap(p: &MassOperator, d: usize) -> Result<KronOperator, LinalgError> {
    if d == 0 {
        return Err(LinalgError::InvalidArgument("spatial dimension must be positive"));
    }
    Ok(match p {
        MassOperator::Kron(k) => k.prepend_identity(d),
        MassOperator::Dense(m) => KronOperator::single(vec![Factor::Identity(d), Factor::Dense(m.clone())])?,
        MassOperator::Banded(b) => KronOperator::single(vec![Factor::Identity(d), Factor::Banded(b.clone())])?,
    })
}

fn check_index(n: usize, i: usize) -> Result<(), LumpError> {
    if i == 0 || i > n {
        return Err(LumpError::BandIndex { i, n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky, kron_materialize};

    fn tri() -> SymMatrix {
        SymMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]])
    }

    #[test]
    fn lump_uses_absolute_values() {
        let a = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let b = SymMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        assert_eq!(lump(&a).diagonal(), [3.0, 3.0]);
        assert_eq!(lump(&b).diagonal(), [3.0, 3.0]);
    }

    #[test]
    fn split_extremes() {
        let b = tri();
        let s1 = band_split(&b, 1).unwrap();
        assert_eq!(s1.d, SymMatrix::from_diag(&[2.0, 2.0, 2.0]));
        assert_eq!(s1.d.add(&s1.r), b);
        let s2 = band_split(&b, 2).unwrap();
        assert_eq!(s2.d, b);
        assert_eq!(s2.r, SymMatrix::zeros(3));
        assert_eq!(band_split(&b, 3).unwrap().r, SymMatrix::zeros(3));
        assert!(matches!(band_split(&b, 0), Err(LumpError::BandIndex { .. })));
        assert!(band_split(&b, 4).is_err());
    }

    #[test]
    fn family_members_of_tridiagonal() {
        let b = tri();
        assert_eq!(make_pi(&b, 1).unwrap().p.to_sym().diagonal(), [3.0, 4.0, 3.0]);
        assert_eq!(make_pi(&b, 1).unwrap().bandwidth(), 0);
        assert_eq!(make_pi(&b, 2).unwrap().p.to_sym(), b);
        assert_eq!(make_pi(&b, 3).unwrap().p.to_sym(), b);
    }

    #[test]
    fn zero_row_rejected() {
        let b = SymMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(make_pi(&b, 1).unwrap_err(), LumpError::ZeroRow { row: 1 });
    }

    #[test]
    fn kronecker_members() {
        let b = tri();
        let p11 = make_pii(&[b.clone(), b.clone()], 1).unwrap();
        let dense = kron_materialize(&p11, 100).unwrap();
        assert_eq!(dense.bandwidth(), 0);
        let pnn = make_pij(&[b.clone(), b.clone()], &[3, 3]).unwrap();
        let full = kron_materialize(&KronOperator::single(vec![Factor::Dense(b.clone()), Factor::Dense(b.clone())]).unwrap(), 100)
            .unwrap();
        assert_eq!(kron_materialize(&pnn, 100).unwrap(), full);
        let p12 = make_pij(&[b.clone(), b.clone()], &[1, 2]).unwrap();
        assert_eq!(kron_materialize(&p12, 100).unwrap().bandwidth(), 1);
        assert!(matches!(make_pij(core::slice::from_ref(&b), &[1]), Err(LumpError::FactorCount(1))));
    }

    #[test]
    fn vector_wrap_repeats_blocks() {
        let p = MassOperator::Dense(SymMatrix::from_diag(&[1.0, 2.0]));
        let w = vector_pde_wrap(&p, 2).unwrap();
        assert_eq!(kron_materialize(&w, 16).unwrap().diagonal(), [1.0, 2.0, 1.0, 2.0]);
        let id = vector_pde_wrap(&MassOperator::Dense(SymMatrix::identity(3)), 2).unwrap();
        assert_eq!(kron_materialize(&id, 16).unwrap(), SymMatrix::identity(6));
        let chol = cholesky(&kron_materialize(&w, 16).unwrap()).unwrap();
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = w.factorize().unwrap().solve(&rhs);
        let y = chol.solve(&rhs);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
