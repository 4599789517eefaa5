use alloc::vec::Vec;

use super::{cholesky, kron_materialize, BandedSpd, Cholesky, KronOperator, KronSolver, LinalgError, SymMatrix};

/// A mass-like operator that can be applied and solved against.
#[derive(Debug, Clone)]
pub enum MassOperator {
    Dense(SymMatrix),
    Banded(BandedSpd),
    Kron(KronOperator),
}

impl MassOperator {
    pub fn dim(&self) -> usize {
        match self {
            MassOperator::Dense(m) => m.dim(),
            MassOperator::Banded(b) => b.dim(),
            MassOperator::Kron(k) => k.dim(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MassOperator::Dense(m) => m.matvec(x),
            MassOperator::Banded(b) => b.matvec(x),
            MassOperator::Kron(k) => k.matvec(x),
        }
    }

    /// Dense copy; Kronecker operators are expanded subject to `cap`.
    pub fn to_sym(&self, cap: usize) -> Result<SymMatrix, LinalgError> {
        match self {
            MassOperator::Dense(m) => Ok(m.clone()),
            MassOperator::Banded(b) => Ok(b.to_sym()),
            MassOperator::Kron(k) => kron_materialize(k, cap),
        }
    }

    pub fn factorize(&self) -> Result<MassSolver, LinalgError> {
        Ok(match self {
            MassOperator::Dense(m) => MassSolver::Dense(cholesky(m)?),
            MassOperator::Banded(b) => MassSolver::Banded(b.clone()),
            MassOperator::Kron(k) => MassSolver::Kron(k.factorize()?),
        })
    }
}

impl From<SymMatrix> for MassOperator {
    fn from(m: SymMatrix) -> Self {
        MassOperator::Dense(m)
    }
}

impl From<BandedSpd> for MassOperator {
    fn from(b: BandedSpd) -> Self {
        MassOperator::Banded(b)
    }
}

impl From<KronOperator> for MassOperator {
    fn from(k: KronOperator) -> Self {
        MassOperator::Kron(k)
    }
}

/// Factored form of a [`MassOperator`].
#[derive(Debug, Clone)]
pub enum MassSolver {
    Dense(Cholesky),
    Banded(BandedSpd),
    Kron(KronSolver),
}

impl MassSolver {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            MassSolver::Dense(c) => c.solve(rhs),
            MassSolver::Banded(b) => b.solve(rhs),
            MassSolver::Kron(k) => k.solve(rhs),
        }
    }
}
