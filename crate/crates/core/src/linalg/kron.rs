use alloc::vec;
use alloc::vec::Vec;

use super::{cholesky, BandedSpd, Cholesky, LinalgError, SymMatrix};

/// Largest dimension [`kron_materialize`] will expand by default.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// One Kronecker factor.
#[derive(Debug, Clone)]
pub enum Factor {
    Identity(usize),
    Dense(SymMatrix),
    Banded(BandedSpd),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Identity(n) => *n,
            Factor::Dense(m) => m.dim(),
            Factor::Banded(b) => b.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Factor::Identity(_) => {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Dense(m) => m.get(i, j),
            Factor::Banded(b) => b.get(i, j),
        }
    }

    pub fn to_sym(&self) -> SymMatrix {
        match self {
            Factor::Identity(n) => SymMatrix::identity(*n),
            Factor::Dense(m) => m.clone(),
            Factor::Banded(b) => b.to_sym(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Factor::Identity(_) => x.to_vec(),
            Factor::Dense(m) => m.matvec(x),
            Factor::Banded(b) => b.matvec(x),
        }
    }

    fn solver(&self) -> Result<FactorSolver, LinalgError> {
        Ok(match self {
            Factor::Identity(_) => FactorSolver::Identity,
            Factor::Dense(m) => FactorSolver::Dense(cholesky(m)?),
            Factor::Banded(b) => FactorSolver::Banded(b.clone()),
        })
    }
}

#[derive(Debug, Clone)]
enum FactorSolver {
    Identity,
    Dense(Cholesky),
    Banded(BandedSpd),
}

impl FactorSolver {
    fn solve(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FactorSolver::Identity => x.to_vec(),
            FactorSolver::Dense(c) => c.solve(x),
            FactorSolver::Banded(b) => b.solve(x),
        }
    }
}

/// `weight · (F₁ ⊗ F₂ ⊗ …)`
#[derive(Debug, Clone)]
pub struct KronTerm {
    pub weight: f64,
    pub factors: Vec<Factor>,
}

impl KronTerm {
    pub fn new(weight: f64, factors: Vec<Factor>) -> Self {
        KronTerm { weight, factors }
    }
}

/// `Σ_i σ_i (U_i ⊗ V_i [⊗ W_i])` with the global index `i₁ n₂ n₃ + i₂ n₃ + i₃`.
#[derive(Debug, Clone)]
pub struct KronOperator {
    terms: Vec<KronTerm>,
    dims: Vec<usize>,
}

impl KronOperator {
    /// Validates shared factor dimensions and non-negative, non-increasing weights.
    pub fn new(terms: Vec<KronTerm>) -> Result<Self, LinalgError> {
        let first = terms.first().ok_or(LinalgError::InvalidArgument("no Kronecker terms"))?;
        if first.factors.is_empty() {
            return Err(LinalgError::InvalidArgument("Kronecker term without factors"));
        }
        let dims: Vec<usize> = first.factors.iter().map(Factor::dim).collect();
        let mut prev = f64::INFINITY;
        for t in &terms {
            if t.factors.len() != dims.len() {
                return Err(LinalgError::DimensionMismatch { expected: dims.len(), got: t.factors.len() });
            }
            for (f, &d) in t.factors.iter().zip(&dims) {
                if f.dim() != d {
                    return Err(LinalgError::DimensionMismatch { expected: d, got: f.dim() });
                }
            }
            if !(t.weight >= 0.0) || t.weight > prev {
                return Err(LinalgError::InvalidArgument("weights must be non-negative and non-increasing"));
            }
            prev = t.weight;
        }
        Ok(KronOperator { terms, dims })
    }

    /// Single unit-weight term.
    pub fn single(factors: Vec<Factor>) -> Result<Self, LinalgError> {
        Self::new(vec![KronTerm::new(1.0, factors)])
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (mut i, mut j) = (i, j);
        let mut idx = vec![(0, 0); self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            idx[k] = (i % d, j % d);
            i /= d;
            j /= d;
        }
        self.terms
            .iter()
            .map(|t| t.weight * t.factors.iter().zip(&idx).map(|(f, &(a, b))| f.get(a, b)).product::<f64>())
            .sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![0.0; x.len()];
        for t in &self.terms {
            let mut z = x.to_vec();
            for (mode, f) in t.factors.iter().enumerate() {
                apply_mode(&self.dims, mode, &mut z, |fiber| f.matvec(fiber));
            }
            for (yi, zi) in y.iter_mut().zip(&z) {
                *yi += t.weight * zi;
            }
        }
        y
    }

    /// Per-factor factorization of a single-term operator.
    pub fn factorize(&self) -> Result<KronSolver, LinalgError> {
        if self.terms.len() != 1 {
            return Err(LinalgError::NotSingleTerm { terms: self.terms.len() });
        }
        let t = &self.terms[0];
        if !(t.weight > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { pivot: 0 });
        }
        let solvers = t.factors.iter().map(Factor::solver).collect::<Result<Vec<_>, _>>()?;
        Ok(KronSolver { dims: self.dims.clone(), inv_weight: 1.0 / t.weight, solvers })
    }

    /// `I_d ⊗ self`
    pub fn prepend_identity(&self, d: usize) -> KronOperator {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut factors = Vec::with_capacity(t.factors.len() + 1);
                factors.push(Factor::Identity(d));
                factors.extend(t.factors.iter().cloned());
                KronTerm::new(t.weight, factors)
            })
            .collect();
        let mut dims = vec![d];
        dims.extend_from_slice(&self.dims);
        KronOperator { terms, dims }
    }
}

/// Factored single-term Kronecker operator.
#[derive(Debug, Clone)]
pub struct KronSolver {
    dims: Vec<usize>,
    inv_weight: f64,
    solvers: Vec<FactorSolver>,
}

impl KronSolver {
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim());
        let mut z = rhs.to_vec();
        for (mode, s) in self.solvers.iter().enumerate() {
            apply_mode(&self.dims, mode, &mut z, |fiber| s.solve(fiber));
        }
        for v in &mut z {
            *v *= self.inv_weight;
        }
        z
    }
}

/// Applies `op` to every mode-`mode` fiber of the row-major tensor `x`.
fn apply_mode(dims: &[usize], mode: usize, x: &mut [f64], op: impl Fn(&[f64]) -> Vec<f64>) {
    let nk = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    let mut fiber = vec![0.0; nk];
    for o in 0..outer {
        let base = o * nk * inner;
        for s in 0..inner {
            for (a, f) in fiber.iter_mut().enumerate() {
                *f = x[base + a * inner + s];
            }
            let out = op(&fiber);
            for (a, v) in out.into_iter().enumerate() {
                x[base + a * inner + s] = v;
            }
        }
    }
}

/// Dense expansion, refused above `cap` rows.
pub fn kron_materialize(op: &KronOperator, cap: usize) -> Result<SymMatrix, LinalgError> {
    let n = op.dim();
    if n > cap {
        return Err(LinalgError::DimensionCap { dim: n, cap });
    }
    let mut out = SymMatrix::zeros(n);
    for t in &op.terms {
        let mut acc = SymMatrix::from_diag(&[t.weight]);
        for f in &t.factors {
            acc = kron_pair(&acc, &f.to_sym());
        }
        out = out.add(&acc);
    }
    Ok(out)
}

fn kron_pair(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut data = vec![0.0; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for k in 0..nb {
                let row = (i * nb + k) * n + j * nb;
                for (l, v) in b.row(k).iter().enumerate() {
                    data[row + l] = aij * v;
                }
            }
        }
    }
    SymMatrix::from_row_major(n, &data).expect("square storage")
}

/// Solves a single-term Kronecker system through factor solves only.
pub fn kron_solve(op: &KronOperator, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if rhs.len() != op.dim() {
        return Err(LinalgError::DimensionMismatch { expected: op.dim(), got: rhs.len() });
    }
    Ok(op.factorize()?.solve(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_product() {
        let op = KronOperator::single(vec![Factor::Identity(2), Factor::Identity(3)]).unwrap();
        assert_eq!(kron_materialize(&op, 100).unwrap(), SymMatrix::identity(6));
        assert_eq!(kron_solve(&op, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn block_layout() {
        let b = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let c = SymMatrix::from_rows(&[&[5.0, 6.0], &[6.0, 8.0]]);
        let op = KronOperator::single(vec![Factor::Dense(b.clone()), Factor::Dense(c.clone())]).unwrap();
        let m = kron_materialize(&op, 100).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(m.get(i * 2 + k, j * 2 + l), b.get(i, j) * c.get(k, l));
                        assert_eq!(op.get(i * 2 + k, j * 2 + l), b.get(i, j) * c.get(k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_solve() {
        let d = Factor::Dense(SymMatrix::from_diag(&[2.0, 4.0]));
        let e = Factor::Banded(BandedSpd::from_diag(&[1.0, 3.0, 5.0]).unwrap());
        let op = KronOperator::single(vec![d, e]).unwrap();
        let x = kron_solve(&op, &[1.0; 6]).unwrap();
        let expect = [0.5, 0.5 / 3.0, 0.1, 0.25, 0.25 / 3.0, 0.05];
        for (a, b) in x.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn cap_enforced() {
        let op = KronOperator::single(vec![Factor::Identity(10), Factor::Identity(10)]).unwrap();
        assert_eq!(kron_materialize(&op, 50).unwrap_err(), LinalgError::DimensionCap { dim: 100, cap: 50 });
    }

    #[test]
    fn weights_must_decrease() {
        let t = |w| KronTerm::new(w, vec![Factor::Identity(2)]);
        assert!(KronOperator::new(vec![t(1.0), t(2.0)]).is_err());
        assert!(KronOperator::new(vec![t(2.0), t(1.0)]).is_ok());
    }

    #[test]
    fn multi_term_solve_rejected() {
        let t = |w| KronTerm::new(w, vec![Factor::Identity(2)]);
        let op = KronOperator::new(vec![t(2.0), t(1.0)]).unwrap();
        assert_eq!(kron_solve(&op, &[1.0, 1.0]).unwrap_err(), LinalgError::NotSingleTerm { terms: 2 });
    }
}
