use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{LinalgError, SymMatrix};
use crate::math;

/// Floating-point operation tally for the banded kernels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub flops: u64,
}

/// Symmetric positive-definite band matrix with packed upper bands.
///
/// `bands[k][i]` is the entry `(i, i + k)`. The Cholesky factor is computed on
/// construction, so every `BandedSpd` in existence is known to be definite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "BandedRaw", into = "BandedRaw")]
pub struct BandedSpd {
    n: usize,
    bands: Vec<Vec<f64>>,
    #[serde(skip)]
    factor: BandedCholesky,
}

#[derive(Serialize, Deserialize)]
struct BandedRaw {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl TryFrom<BandedRaw> for BandedSpd {
    type Error = LinalgError;
    fn try_from(raw: BandedRaw) -> Result<Self, LinalgError> {
        BandedSpd::from_bands(raw.n, raw.bands)
    }
}

impl From<BandedSpd> for BandedRaw {
    fn from(b: BandedSpd) -> Self {
        BandedRaw { n: b.n, bands: b.bands }
    }
}

impl BandedSpd {
    /// `bands[k]` must have length `n - k`; `bands[0]` is the diagonal.
    pub fn from_bands(n: usize, bands: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        if n == 0 || bands.is_empty() || bands.len() > n {
            return Err(LinalgError::InvalidArgument("band storage does not fit the dimension"));
        }
        for (k, band) in bands.iter().enumerate() {
            if band.len() != n - k {
                return Err(LinalgError::DimensionMismatch { expected: n - k, got: band.len() });
            }
        }
        let factor = BandedCholesky::factor(n, &bands, &mut OpCount::default())?;
        Ok(BandedSpd { n, bands, factor })
    }

    /// Packs a dense symmetric matrix, rejecting nonzeros outside bandwidth `b`.
    pub fn from_sym(a: &SymMatrix, b: usize) -> Result<Self, LinalgError> {
        let n = a.dim();
        let b = b.min(n.saturating_sub(1));
        for i in 0..n {
            for j in (i + b + 1)..n {
                if a.get(i, j) != 0.0 {
                    return Err(LinalgError::OutsideBand { row: i, col: j });
                }
            }
        }
        let bands = (0..=b).map(|k| (0..n - k).map(|i| a.get(i, i + k)).collect()).collect();
        Self::from_bands(n, bands)
    }

    pub fn from_diag(d: &[f64]) -> Result<Self, LinalgError> {
        Self::from_bands(d.len(), vec![d.to_vec()])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k < self.bands.len() {
            self.bands[k][lo]
        } else {
            0.0
        }
    }

    pub fn to_sym(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for (k, band) in self.bands.iter().enumerate() {
            for (i, v) in band.iter().enumerate() {
                m.set(i, i + k, *v);
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(d, v)| d * v).collect();
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for (i, v) in band.iter().enumerate() {
                y[i] += v * x[i + k];
                y[i + k] += v * x[i];
            }
        }
        y
    }

    /// Row sums `P e`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.n])
    }

    pub fn factor(&self) -> &BandedCholesky {
        &self.factor
    }

    /// Solves with the stored factor.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(rhs, &mut OpCount::default())
    }
}

/// Band Cholesky factor `L` with bandwidth `b`.
#[derive(Debug, Clone, Default)]
pub struct BandedCholesky {
    n: usize,
    b: usize,
    // row i holds L[i, i-b..=i] at l[i*(b+1) .. (i+1)*(b+1)], left-padded with zeros
    l: Vec<f64>,
}

impl BandedCholesky {
    fn factor(n: usize, bands: &[Vec<f64>], ops: &mut OpCount) -> Result<Self, LinalgError> {
        let b = bands.len() - 1;
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        let mut flops = 0u64;
        for i in 0..n {
            let first = i.saturating_sub(b);
            for j in first..=i {
                let k0 = first.max(j.saturating_sub(b));
                let mut s = bands[i - j][j];
                for k in k0..j {
                    s -= l[i * w + (k + b - i)] * l[j * w + (k + b - j)];
                }
                flops += 2 * (j - k0) as u64;
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(LinalgError::NotPositiveDefinite { pivot: i });
                    }
                    l[i * w + b] = math::sqrt(s);
                } else {
                    l[i * w + (j + b - i)] = s / l[j * w + b];
                }
                flops += 1;
            }
        }
        ops.flops += flops;
        Ok(BandedCholesky { n, b, l })
    }

    pub fn solve(&self, rhs: &[f64], ops: &mut OpCount) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (n, b, w) = (self.n, self.b, self.b + 1);
        let mut x = rhs.to_vec();
        let mut flops = 0u64;
        for i in 0..n {
            let first = i.saturating_sub(b);
            let mut s = x[i];
            for k in first..i {
                s -= self.l[i * w + (k + b - i)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
            flops += 2 * (i - first) as u64 + 1;
        }
        for i in (0..n).rev() {
            let last = (i + b).min(n - 1);
            let mut s = x[i];
            for k in (i + 1)..=last {
                s -= self.l[k * w + (i + b - k)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
            flops += 2 * (last - i) as u64 + 1;
        }
        ops.flops += flops;
        x
    }
}

/// Factors and solves `P x = rhs` in `O(n b²)`.
pub fn banded_cholesky_solve(p: &BandedSpd, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    banded_cholesky_solve_counted(p, rhs).map(|(x, _)| x)
}

/// As [`banded_cholesky_solve`], also reporting factorization plus solve flops.
pub fn banded_cholesky_solve_counted(
    p: &BandedSpd,
    rhs: &[f64],
) -> Result<(Vec<f64>, OpCount), LinalgError> {
    if rhs.len() != p.n {
        return Err(LinalgError::DimensionMismatch { expected: p.n, got: rhs.len() });
    }
    let mut ops = OpCount::default();
    let f = BandedCholesky::factor(p.n, &p.bands, &mut ops)?;
    let x = f.solve(rhs, &mut ops);
    Ok((x, ops))
}

/// Tridiagonal solve by forward elimination and back substitution.
pub fn thomas_solve(p: &BandedSpd, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    thomas_solve_counted(p, rhs).map(|(x, _)| x)
}

pub fn thomas_solve_counted(p: &BandedSpd, rhs: &[f64]) -> Result<(Vec<f64>, OpCount), LinalgError> {
    let n = p.n;
    if rhs.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: rhs.len() });
    }
    if p.bandwidth() > 1 {
        return Err(LinalgError::InvalidArgument("Thomas algorithm needs bandwidth at most 1"));
    }
    let diag = &p.bands[0];
    let zeros = vec![0.0; n.saturating_sub(1)];
    let off = p.bands.get(1).unwrap_or(&zeros);

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut flops = 0u64;
    let mut denom = diag[0];
    if !(denom > 0.0) {
        return Err(LinalgError::NotPositiveDefinite { pivot: 0 });
    }
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    flops += 2;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if !(denom > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { pivot: i });
        }
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
        flops += 7;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
        flops += 2;
    }
    Ok((d, OpCount { flops }))
}
