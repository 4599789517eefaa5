//! Nearest Kronecker product (NKP) approximation of mass matrices.

mod rearrange;
mod tensor3;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::linalg::{
    kron_materialize, svd, sym_eigvals, Factor, KronOperator, KronTerm, LinalgError, Matrix, SymMatrix,
    DEFAULT_DENSE_CAP,
};
use crate::lumping::{make_pii, LumpError};
use crate::pencil::{gen_eigvals, PencilError};
use crate::splinefem::{assemble_2d, Density, EndConditions, FemError, GeometryMap, SplineSpace};
use crate::{math, DEFAULT_TOL};

pub use rearrange::{rearrange, rearrange_general, Rearranged};
pub use tensor3::{nkp_rank1_3d, rearrange_3d, Tensor3, HOPM_MAX_SWEEPS, HOPM_TOL};

/// Singular values above `RANK_TOL · σ₁` count towards the Kronecker rank.
pub const RANK_TOL: f64 = 1e-14;
/// Factors whose smallest eigenvalue lies in `[−SPD_REPAIR · σ₁, 0]` are accepted.
pub const SPD_REPAIR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum NkpError {
    DimensionMismatch { expected: usize, got: usize },
    ZeroMatrix,
    RankTooLarge { r: usize, rank: usize },
    IndefiniteFactor { factor: usize, min_eig: f64 },
    Linalg(LinalgError),
    Pencil(PencilError),
    Lump(LumpError),
    Fem(FemError),
}

impl fmt::Display for NkpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NkpError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            NkpError::ZeroMatrix => f.write_str("cannot approximate the zero matrix"),
            NkpError::RankTooLarge { r, rank } => write!(f, "requested {r} terms but the numerical rank is {rank}"),
            NkpError::IndefiniteFactor { factor, min_eig } => {
                write!(f, "Kronecker factor {factor} is indefinite (smallest eigenvalue {min_eig:e})")
            }
            NkpError::Linalg(e) => write!(f, "{e}"),
            NkpError::Pencil(e) => write!(f, "{e}"),
            NkpError::Lump(e) => write!(f, "{e}"),
            NkpError::Fem(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for NkpError {}

impl From<LinalgError> for NkpError {
    fn from(e: LinalgError) -> Self {
        NkpError::Linalg(e)
    }
}

impl From<PencilError> for NkpError {
    fn from(e: PencilError) -> Self {
        NkpError::Pencil(e)
    }
}

impl From<LumpError> for NkpError {
    fn from(e: LumpError) -> Self {
        NkpError::Lump(e)
    }
}

impl From<FemError> for NkpError {
    fn from(e: FemError) -> Self {
        NkpError::Fem(e)
    }
}

/// Rank-1 Kronecker approximation `B ⊗ C [⊗ D]`.
#[derive(Debug, Clone, Serialize)]
pub struct NkpResult {
    pub factors: Vec<SymMatrix>,
    /// Largest `‖F − Fᵀ‖_F / ‖F‖_F` over the factors before symmetrization.
    pub asymmetry: f64,
    /// Singular values of `R(M)` (2D); the single weight `σ` (3D).
    pub singular_values: Vec<f64>,
    /// `‖M − B ⊗ C‖_F`
    pub error: f64,
    /// Numerical Kronecker rank (2D).
    pub rank: usize,
    /// Residual per power-iteration sweep, starting with the HOSVD guess (3D).
    pub history: Vec<f64>,
    pub converged: bool,
}

impl NkpResult {
    pub fn kron(&self) -> KronOperator {
        KronOperator::single(self.factors.iter().cloned().map(Factor::Dense).collect())
            .expect("factors of one approximation share their layout")
    }

    pub fn materialize(&self) -> Result<SymMatrix, NkpError> {
        Ok(kron_materialize(&self.kron(), DEFAULT_DENSE_CAP)?)
    }

    /// Factors checked for definiteness, with roundoff-level indefiniteness tolerated.
    pub fn spd_factors(&self) -> Result<Vec<SymMatrix>, NkpError> {
        let sigma1 = self.singular_values.first().copied().unwrap_or(0.0);
        for (k, f) in self.factors.iter().enumerate() {
            let min_eig = sym_eigvals(f)?[0];
            if min_eig < -SPD_REPAIR * sigma1 {
                return Err(NkpError::IndefiniteFactor { factor: k, min_eig });
            }
        }
        Ok(self.factors.clone())
    }

    /// Two-level preconditioner `P̃_ii` from the approximation's factors.
    pub fn lumped(&self, i: usize) -> Result<KronOperator, NkpError> {
        Ok(make_pii(&self.spd_factors()?, i)?)
    }
}

struct BlockSvd {
    sigma: Vec<f64>,
    /// Singular vector pairs expanded to full length `n₁²` and `n₂²`.
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

fn block_svd(m: &SymMatrix, n1: usize, n2: usize) -> Result<BlockSvd, NkpError> {
    let r = rearrange(m, n1, n2)?;
    let (rows, cols) = r.nonzero_support();
    if rows.is_empty() {
        return Err(NkpError::ZeroMatrix);
    }
    let compact = Matrix::from_fn(rows.len(), cols.len(), |i, j| r.matrix[(rows[i], cols[j])]);
    let s = svd(&compact, DEFAULT_TOL)?;
    let k = s.singular_values.len();
    let expand = |vecs: &Matrix, support: &[usize], len: usize, j: usize| {
        let mut out = vec![0.0; len];
        for (t, &idx) in support.iter().enumerate() {
            out[idx] = vecs[(t, j)];
        }
        out
    };
    Ok(BlockSvd {
        u: (0..k).map(|j| expand(&s.left_vectors, &rows, n1 * n1, j)).collect(),
        v: (0..k).map(|j| expand(&s.right_vectors, &cols, n2 * n2, j)).collect(),
        sigma: s.singular_values,
    })
}

fn numerical_rank(sigma: &[f64]) -> usize {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().filter(|&&s| s > RANK_TOL * s1).count()
}

/// `sqrt(Σ_{i>r} σ_i²)`
pub fn truncation_error(sigma: &[f64], r: usize) -> f64 {
    math::sqrt(sigma.iter().skip(r).map(|s| s * s).sum())
}

pub(crate) fn sym_from(a: &Matrix) -> (SymMatrix, f64) {
    let n = a.rows();
    let norm = a.frobenius_norm();
    let skew = a.sub(&a.transpose()).frobenius_norm();
    let asym = if norm > 0.0 { skew / norm } else { 0.0 };
    (SymMatrix::from_fn(n, |i, j| a[(i, j)]), asym)
}

fn trace(a: &Matrix) -> f64 {
    (0..a.rows()).map(|i| a[(i, i)]).sum()
}

fn scaled_unvec(v: &[f64], n: usize, s: f64) -> Matrix {
    Matrix::from_fn(n, n, |i, j| s * v[j * n + i])
}

/// Best `B ⊗ C` in the Frobenius norm, `B = √σ₁ unvec(u₁)`, `C = √σ₁ unvec(v₁)`,
/// signed so that `trace(B) ≥ 0`.
pub fn nkp_rank1(m: &SymMatrix, n1: usize, n2: usize) -> Result<NkpResult, NkpError> {
    let s = block_svd(m, n1, n2)?;
    let root = math::sqrt(s.sigma[0]);
    let mut b = scaled_unvec(&s.u[0], n1, root);
    let mut c = scaled_unvec(&s.v[0], n2, root);
    if trace(&b) < 0.0 {
        b = scaled_unvec(&s.u[0], n1, -root);
        c = scaled_unvec(&s.v[0], n2, -root);
    }
    let (b, ab) = sym_from(&b);
    let (c, ac) = sym_from(&c);
    Ok(NkpResult {
        factors: vec![b, c],
        asymmetry: ab.max(ac),
        error: truncation_error(&s.sigma, 1),
        rank: numerical_rank(&s.sigma),
        singular_values: s.sigma,
        history: Vec::new(),
        converged: true,
    })
}

/// `Σ_{i≤r} σ_i U_i ⊗ V_i` with unit-norm factors.
pub fn nkp_rank_r(m: &SymMatrix, n1: usize, n2: usize, r: usize) -> Result<KronOperator, NkpError> {
    let s = block_svd(m, n1, n2)?;
    let rank = numerical_rank(&s.sigma);
    if r == 0 || r > rank {
        return Err(NkpError::RankTooLarge { r, rank });
    }
    let terms = (0..r)
        .map(|k| {
            let sign = if k == 0 && trace(&scaled_unvec(&s.u[0], n1, 1.0)) < 0.0 { -1.0 } else { 1.0 };
            let (u, _) = sym_from(&scaled_unvec(&s.u[k], n1, sign));
            let (v, _) = sym_from(&scaled_unvec(&s.v[k], n2, sign));
            KronTerm::new(s.sigma[k], vec![Factor::Dense(u), Factor::Dense(v)])
        })
        .collect();
    Ok(KronOperator::new(terms)?)
}

/// Condition estimate for `M̃ = σ₁ U₁ ⊗ V₁` against a multi-term `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondBound {
    pub delta: f64,
    /// `(1 + δ)/(1 − δ)`, present only for `δ < 1`.
    pub bound: Option<f64>,
    /// `λ_n(M, M̃) / λ_1(M, M̃)`
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl CondBound {
    pub fn holds(&self, slack: f64) -> Option<bool> {
        self.bound.map(|b| self.kappa <= b + slack)
    }
}

/// `δ = Σ_{i≥2} (σ_i/σ₁) Π_d max_k |λ_k(U_{i,d}, U_{1,d})|` and the attained `κ`.
pub fn cond_bound(op: &KronOperator) -> Result<CondBound, NkpError> {
    let terms = op.terms();
    let lead = &terms[0];
    let lead_dense: Vec<SymMatrix> = lead.factors.iter().map(Factor::to_sym).collect();
    let mut delta = 0.0;
    for t in &terms[1..] {
        let mut prod = t.weight / lead.weight;
        for (f, f1) in t.factors.iter().zip(&lead_dense) {
            let ev = gen_eigvals(&f.to_sym(), f1)?;
            prod *= ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        }
        delta += prod;
    }
    let m = kron_materialize(op, DEFAULT_DENSE_CAP)?;
    let mt = kron_materialize(&KronOperator::new(vec![lead.clone()])?, DEFAULT_DENSE_CAP)?;
    let ev = gen_eigvals(&m, &mt)?;
    let (lambda_min, lambda_max) = (ev[0], ev[ev.len() - 1]);
    Ok(CondBound {
        delta,
        bound: (delta < 1.0).then(|| (1.0 + delta) / (1.0 - delta)),
        kappa: lambda_max / lambda_min,
        lambda_min,
        lambda_max,
    })
}

/// `(Σ_i (λ_i(M) − λ_i(M̃))², ‖M − M̃‖_F²)`
pub fn hoffman_wielandt_check(m: &SymMatrix, mt: &SymMatrix) -> Result<(f64, f64), NkpError> {
    if m.dim() != mt.dim() {
        return Err(NkpError::DimensionMismatch { expected: m.dim(), got: mt.dim() });
    }
    let a = sym_eigvals(m)?;
    let b = sym_eigvals(mt)?;
    let lhs = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
    let e = m.sub(mt).frobenius_norm();
    Ok((lhs, e * e))
}

/// One mesh of [`spectral_equivalence_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub subdivisions: usize,
    pub h: f64,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub error: Option<String>,
}

/// Extreme eigenvalues of `(M, B ⊗ C)` for the rank-1 NKP on a sequence of meshes.
pub fn spectral_equivalence_scan(
    degree: usize,
    meshes: &[usize],
    density: &Density,
    geometry: &GeometryMap,
    ends: [EndConditions; 2],
) -> Vec<ScanRow> {
    meshes
        .iter()
        .map(|&m| {
            let h = 1.0 / m as f64;
            let run = || -> Result<(f64, f64), NkpError> {
                let s = SplineSpace::new(degree, m)?;
                let model = assemble_2d([s.clone(), s], density, geometry, ends)?;
                let d = model.free_dims();
                let approx = nkp_rank1(model.mass(), d[0], d[1])?;
                let ev = gen_eigvals(model.mass(), &approx.materialize()?)?;
                Ok((ev[0], ev[ev.len() - 1]))
            };
            match run() {
                Ok((lo, hi)) => ScanRow { subdivisions: m, h, lambda_min: Some(lo), lambda_max: Some(hi), error: None },
                Err(e) => ScanRow { subdivisions: m, h, lambda_min: None, lambda_max: None, error: Some(format!("{e}")) },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kron_dense(b: &SymMatrix, c: &SymMatrix) -> SymMatrix {
        kron_materialize(&KronOperator::single(vec![Factor::Dense(b.clone()), Factor::Dense(c.clone())]).unwrap(), 4096)
            .unwrap()
    }

    fn spd(n: usize, shift: f64) -> SymMatrix {
        SymMatrix::from_fn(n, |i, j| if i == j { shift + i as f64 } else { 1.0 / (1.0 + (i + j) as f64) })
    }

    #[test]
    fn exact_kronecker_is_recovered() {
        let b = spd(3, 4.0);
        let c = spd(4, 2.0);
        let m = kron_dense(&b, &c);
        let r = nkp_rank1(&m, 3, 4).unwrap();
        assert!(r.error <= 1e-12 * m.frobenius_norm());
        assert_eq!(r.rank, 1);
        let alpha = r.factors[0].get(0, 0) / b.get(0, 0);
        assert!(r.factors[0].sub(&b.scaled(alpha)).frobenius_norm() < 1e-12 * b.frobenius_norm() * alpha);
        assert!(r.factors[1].sub(&c.scaled(1.0 / alpha)).frobenius_norm() < 1e-12 * c.frobenius_norm() / alpha);
        assert!(r.materialize().unwrap().sub(&m).frobenius_norm() < 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn two_terms() {
        let m = kron_dense(&spd(3, 4.0), &spd(3, 3.0)).add(&kron_dense(&SymMatrix::identity(3), &spd(3, 1.0)));
        let r = nkp_rank1(&m, 3, 3).unwrap();
        assert_eq!(r.rank, 2);
        let direct = r.materialize().unwrap().sub(&m).frobenius_norm();
        assert!((direct - r.error).abs() <= 1e-10 * r.error);
        let op = nkp_rank_r(&m, 3, 3, 2).unwrap();
        assert!(kron_materialize(&op, 100).unwrap().sub(&m).frobenius_norm() <= 1e-12 * m.frobenius_norm());
        assert!(matches!(nkp_rank_r(&m, 3, 3, 3), Err(NkpError::RankTooLarge { r: 3, rank: 2 })));
    }

    #[test]
    fn single_term_condition_is_one() {
        let op = KronOperator::single(vec![Factor::Dense(spd(2, 3.0)), Factor::Dense(spd(3, 2.0))]).unwrap();
        let c = cond_bound(&op).unwrap();
        assert_eq!(c.delta, 0.0);
        assert!((c.kappa - 1.0).abs() < 1e-12);
        assert_eq!(c.holds(1e-8), Some(true));
    }

    #[test]
    fn hoffman_wielandt_shift_is_equality() {
        let m = spd(4, 3.0);
        let (l0, r0) = hoffman_wielandt_check(&m, &m).unwrap();
        assert_eq!((l0, r0), (0.0, 0.0));
        let eps = 1e-3;
        let (l, r) = hoffman_wielandt_check(&m, &m.add(&SymMatrix::identity(4).scaled(eps))).unwrap();
        assert!((l - 4.0 * eps * eps).abs() < 1e-15);
        assert!((r - 4.0 * eps * eps).abs() < 1e-15);
    }

    #[test]
    fn separable_scan_is_flat() {
        let rows = spectral_equivalence_scan(
            2,
            &[3, 5],
            &Density::Constant(1.0),
            &GeometryMap::UnitSquare,
            [EndConditions::natural(); 2],
        );
        for row in rows {
            assert!((row.lambda_min.unwrap() - 1.0).abs() < 1e-10);
            assert!((row.lambda_max.unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
