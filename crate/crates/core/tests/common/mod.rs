#![allow(dead_code)]

use lumplab_core::linalg::{Matrix, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `QᵀDQ + shift·I` from a random Gram matrix.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> SymMatrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let gtg = g.transpose().matmul(&g).unwrap();
    SymMatrix::from_fn(n, |i, j| gtg[(i, j)] + if i == j { shift } else { 0.0 })
}

/// Entrywise nonnegative, strictly diagonally dominant banded matrix.
pub fn random_nonneg_banded(rng: &mut ChaCha8Rng, n: usize, b: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..(i + b + 1).min(n) {
            m.set(i, j, rng.gen_range(0.0..1.0));
        }
    }
    for i in 0..n {
        let s: f64 = m.row(i).iter().sum();
        m.set(i, i, s + rng.gen_range(0.1..1.0));
    }
    m
}

/// Dense Gaussian elimination with partial pivoting, kept independent of the library solvers.
pub fn dense_solve(a: &SymMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            let (top, rest) = m.split_at_mut(i);
            for (a, b) in rest[0][k..].iter_mut().zip(&top[k][k..]) {
                *a -= f * b;
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub fn kron_dense(factors: &[&SymMatrix]) -> SymMatrix {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        let (n, m) = (out.dim(), f.dim());
        out = SymMatrix::from_fn(n * m, |i, j| out.get(i / m, j / m) * f.get(i % m, j % m));
    }
    out
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
