use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FemError;
use crate::precision::Scalar;

/// Univariate spline space on `[0, 1]` with an open uniform knot vector and
/// maximal smoothness `C^{p-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplineSpace {
    degree: usize,
    subdivisions: usize,
}

/// Nonzero basis functions at a point: indices `first ..= first + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval<T = f64> {
    pub first: usize,
    pub values: Vec<T>,
    pub derivatives: Vec<T>,
}

impl SplineSpace {
    pub fn new(degree: usize, subdivisions: usize) -> Result<Self, FemError> {
        if degree == 0 {
            return Err(FemError::InvalidSpace("degree must be at least 1"));
        }
        if subdivisions == 0 {
            return Err(FemError::InvalidSpace("at least one element is required"));
        }
        Ok(SplineSpace { degree, subdivisions })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    /// `n = m + p`
    #[inline]
    pub fn dim(&self) -> usize {
        self.subdivisions + self.degree
    }

    /// Knot `i` of the open uniform vector of length `m + 2p + 1`.
    pub fn knot<T: Scalar>(&self, i: usize) -> T {
        let p = self.degree;
        let m = self.subdivisions;
        if i <= p {
            T::zero()
        } else if i >= m + p {
            T::one()
        } else {
            T::from_usize(i - p) / T::from_usize(m)
        }
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.dim() + self.degree + 1).map(|i| self.knot(i)).collect()
    }

    /// Element `e` spans `[e/m, (e+1)/m]`.
    pub fn element_bounds<T: Scalar>(&self, e: usize) -> (T, T) {
        let m = T::from_usize(self.subdivisions);
        (T::from_usize(e) / m, T::from_usize(e + 1) / m)
    }

    /// Element containing `x`, with `x = 1` assigned to the last element.
    pub fn element_of(&self, x: f64) -> usize {
        let e = (x * self.subdivisions as f64) as usize;
        e.min(self.subdivisions - 1)
    }

    pub fn eval(&self, x: f64) -> Result<BasisEval, FemError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(FemError::OutOfDomain(x));
        }
        Ok(self.eval_on_element(self.element_of(x), x))
    }

    /// Evaluates on a given element; `x` may sit on either end of it, which
    /// gives one-sided values at interior knots.
    pub fn eval_on_element<T: Scalar>(&self, e: usize, x: T) -> BasisEval<T> {
        let p = self.degree;
        let span = e + p;
        let lower = self.basis_funs(span, x, p - 1);
        let full = self.basis_funs(span, x, p);
        let mut derivatives = vec![T::zero(); p + 1];
        let pf = T::from_usize(p);
        for (j, d) in derivatives.iter_mut().enumerate() {
            let i = span - p + j;
            let mut v = T::zero();
            if j >= 1 {
                v += lower[j - 1] / (self.knot::<T>(i + p) - self.knot::<T>(i));
            }
            if j < p {
                v -= lower[j] / (self.knot::<T>(i + p + 1) - self.knot::<T>(i + 1));
            }
            *d = pf * v;
        }
        BasisEval { first: e, values: full, derivatives }
    }

    /// Cox–de Boor triangle for the `q + 1` degree-`q` functions nonzero on `span`.
    fn basis_funs<T: Scalar>(&self, span: usize, x: T, q: usize) -> Vec<T> {
        let mut n = vec![T::zero(); q + 1];
        let mut left = vec![T::zero(); q + 1];
        let mut right = vec![T::zero(); q + 1];
        n[0] = T::one();
        for j in 1..=q {
            left[j] = x - self.knot::<T>(span + 1 - j);
            right[j] = self.knot::<T>(span + j) - x;
            let mut saved = T::zero();
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.dim())
            .map(|i| (1..=p).map(|k| self.knot::<f64>(i + k)).sum::<f64>() / p as f64)
            .collect()
    }
}
