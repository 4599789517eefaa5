use alloc::vec;
use alloc::vec::Vec;

use super::{sym_from, NkpError, NkpResult};
use crate::linalg::{norm2, sym_eig, Matrix, SymMatrix};
use crate::{math, DEFAULT_TOL};

pub const HOPM_MAX_SWEEPS: usize = 200;
/// Stop once the residual changes by less than this fraction of `‖M‖_F`.
pub const HOPM_TOL: f64 = 1e-12;

/// Third-order rearrangement with `R(B ⊗ C ⊗ D) = vec(B) ∘ vec(C) ∘ vec(D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub shape: [usize; 3],
    /// Entry `(a, b, c)` at `(a s₁ + b) s₂ + c`.
    pub data: Vec<f64>,
}

impl Tensor3 {
    #[inline]
    fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.shape[1] + b) * self.shape[2] + c]
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Contraction with two vectors, leaving `mode` free.
    fn contract(&self, mode: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        let [s0, s1, s2] = self.shape;
        let mut out = vec![0.0; self.shape[mode]];
        for a in 0..s0 {
            for b in 0..s1 {
                for c in 0..s2 {
                    let t = self.at(a, b, c);
                    match mode {
                        0 => out[a] += t * x[b] * y[c],
                        1 => out[b] += t * x[a] * y[c],
                        _ => out[c] += t * x[a] * y[b],
                    }
                }
            }
        }
        out
    }

    /// `‖T − σ a ∘ b ∘ c‖_F`
    fn residual(&self, sigma: f64, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                let w = sigma * ai * bj;
                for (k, ck) in c.iter().enumerate() {
                    let e = self.at(i, j, k) - w * ck;
                    s += e * e;
                }
            }
        }
        math::sqrt(s)
    }

    /// Leading left singular vector of the mode unfolding.
    fn leading_mode_vector(&self, mode: usize) -> Result<Vec<f64>, NkpError> {
        let [s0, s1, s2] = self.shape;
        let n = self.shape[mode];
        let mut gram = vec![0.0; n * n];
        let fiber = |a: usize, b: usize, c: usize| -> (usize, usize) {
            match mode {
                0 => (a, b * s2 + c),
                1 => (b, a * s2 + c),
                _ => (c, a * s1 + b),
            }
        };
        let cols = s0 * s1 * s2 / n;
        let mut unfold = vec![0.0; n * cols];
        for a in 0..s0 {
            for b in 0..s1 {
                for c in 0..s2 {
                    let (r, col) = fiber(a, b, c);
                    unfold[r * cols + col] = self.at(a, b, c);
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = unfold[i * cols..(i + 1) * cols].iter().zip(&unfold[j * cols..(j + 1) * cols]).map(|(x, y)| x * y).sum();
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let e = sym_eig(&SymMatrix::from_row_major(n, &gram)?, DEFAULT_TOL)?;
        Ok(e.vectors.column(n - 1))
    }
}

/// Rearranges `M` with blocks of sizes `n₁ ≥ …`: `M[(i₁n₂+i₂)n₃+i₃, (j₁n₂+j₂)n₃+j₃]` goes to
/// `(j₁n₁+i₁, j₂n₂+i₂, j₃n₃+i₃)`.
pub fn rearrange_3d(m: &SymMatrix, dims: [usize; 3]) -> Result<Tensor3, NkpError> {
    let [n1, n2, n3] = dims;
    if n1 * n2 * n3 != m.dim() {
        return Err(NkpError::DimensionMismatch { expected: n1 * n2 * n3, got: m.dim() });
    }
    let shape = [n1 * n1, n2 * n2, n3 * n3];
    let mut data = vec![0.0; shape[0] * shape[1] * shape[2]];
    for r in 0..m.dim() {
        let (i1, i2, i3) = (r / (n2 * n3), (r / n3) % n2, r % n3);
        for c in 0..m.dim() {
            let (j1, j2, j3) = (c / (n2 * n3), (c / n3) % n2, c % n3);
            let (a, b, k) = (j1 * n1 + i1, j2 * n2 + i2, j3 * n3 + i3);
            data[(a * shape[1] + b) * shape[2] + k] = m.get(r, c);
        }
    }
    Ok(Tensor3 { shape, data })
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Rank-1 tensor approximation `B ⊗ C ⊗ D` by higher-order power iteration
/// from a truncated HOSVD guess. `converged` is false when the sweep cap is hit;
/// the best iterate is returned either way.
pub fn nkp_rank1_3d(m: &SymMatrix, dims: [usize; 3]) -> Result<NkpResult, NkpError> {
    let t = rearrange_3d(m, dims)?;
    let norm = t.frobenius_norm();
    if norm == 0.0 {
        return Err(NkpError::ZeroMatrix);
    }
    let mut a = t.leading_mode_vector(0)?;
    let mut b = t.leading_mode_vector(1)?;
    let mut c = t.leading_mode_vector(2)?;
    let s0: f64 = t.contract(2, &a, &b).iter().zip(&c).map(|(x, y)| x * y).sum();
    let mut sigma = s0;
    let mut history = vec![t.residual(s0, &a, &b, &c)];
    let mut best = (history[0], sigma, a.clone(), b.clone(), c.clone());
    let mut converged = false;
    for _ in 0..HOPM_MAX_SWEEPS {
        a = t.contract(0, &b, &c);
        normalize(&mut a);
        b = t.contract(1, &a, &c);
        normalize(&mut b);
        c = t.contract(2, &a, &b);
        sigma = normalize(&mut c);
        let res = t.residual(sigma, &a, &b, &c);
        let prev = *history.last().expect("history starts non-empty");
        history.push(res);
        if res < best.0 {
            best = (res, sigma, a.clone(), b.clone(), c.clone());
        }
        if (prev - res).abs() <= HOPM_TOL * norm {
            converged = true;
            break;
        }
    }
    let (error, sigma, a, b, c) = best;
    let scale = math::cbrt(sigma.abs());
    let sign = if sigma < 0.0 { -1.0 } else { 1.0 };
    let unvec = |v: &[f64], n: usize, s: f64| Matrix::from_fn(n, n, |i, j| s * v[j * n + i]);
    let mut fb = unvec(&a, dims[0], scale);
    let mut fc = unvec(&b, dims[1], scale);
    let mut fd = unvec(&c, dims[2], sign * scale);
    let tr = |x: &Matrix| (0..x.rows()).map(|i| x[(i, i)]).sum::<f64>();
    if tr(&fb) < 0.0 {
        fb = fb.scaled(-1.0);
        fd = fd.scaled(-1.0);
    }
    if tr(&fc) < 0.0 {
        fc = fc.scaled(-1.0);
        fd = fd.scaled(-1.0);
    }
    let (sb, ab) = sym_from(&fb);
    let (sc, ac) = sym_from(&fc);
    let (sd, ad) = sym_from(&fd);
    Ok(NkpResult {
        factors: vec![sb, sc, sd],
        asymmetry: ab.max(ac).max(ad),
        singular_values: vec![sigma.abs()],
        error,
        rank: 1,
        history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_materialize, Factor, KronOperator};

    fn spd(n: usize, shift: f64) -> SymMatrix {
        SymMatrix::from_fn(n, |i, j| if i == j { shift + i as f64 } else { 0.5 / (1.0 + (i + j) as f64) })
    }

    #[test]
    fn triple_product_recovered() {
        let (b, c, d) = (spd(2, 3.0), spd(3, 2.0), spd(2, 5.0));
        let op = KronOperator::single(vec![Factor::Dense(b.clone()), Factor::Dense(c.clone()), Factor::Dense(d.clone())])
            .unwrap();
        let m = kron_materialize(&op, 100).unwrap();
        let r = nkp_rank1_3d(&m, [2, 3, 2]).unwrap();
        assert!(r.converged);
        assert!(r.error <= 1e-10 * m.frobenius_norm(), "{}", r.error);
        let back = r.materialize().unwrap();
        assert!(back.sub(&m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-13 * m.frobenius_norm());
        }
        let alpha = r.factors[0].get(0, 0) / b.get(0, 0);
        assert!(r.factors[0].sub(&b.scaled(alpha)).frobenius_norm() < 1e-10 * alpha * b.frobenius_norm());
    }
}
