use alloc::vec;
use alloc::vec::Vec;

use super::{LinalgError, Matrix, SymMatrix};
use crate::math;

const JACOBI_MAX_DIM: usize = 64;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` holds the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
    /// `‖VᵀV − I‖_F`.
    pub orthogonality: f64,
}

impl EigResult {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Full eigen-decomposition. `tol` is the relative residual accepted per eigenpair.
pub fn sym_eig(a: &SymMatrix, tol: f64) -> Result<EigResult, LinalgError> {
    check_input(a, tol)?;
    let n = a.dim();
    let (values, vecs) = if n <= JACOBI_MAX_DIM {
        jacobi(a)?
    } else {
        let mut v = a.as_slice().to_vec();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tred2(n, &mut v, &mut d, &mut e, true);
        tql2(n, &mut d, &mut e, Some(&mut v))?;
        (d, v)
    };
    let order = ascending_order(&values);
    let mut vectors = Matrix::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        sorted.push(values[src]);
        for i in 0..n {
            vectors[(i, k)] = vecs[i * n + src];
        }
    }
    let gram = vectors.transpose().matmul(&vectors)?;
    let orthogonality = gram.sub(&Matrix::identity(n)).frobenius_norm();

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let v = vectors.column(k);
        let av = a.matvec(&v);
        let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - sorted[k] * y).powi(2)).sum();
        let r = math::sqrt(r);
        if !(r <= tol * scale) {
            return Err(LinalgError::NoConvergence { method: "sym_eig", off_norm: r });
        }
    }
    Ok(EigResult { values: sorted, vectors, orthogonality })
}

/// Ascending eigenvalues only.
pub fn sym_eigvals(a: &SymMatrix) -> Result<Vec<f64>, LinalgError> {
    check_input(a, 1.0)?;
    let n = a.dim();
    let mut values = if n <= JACOBI_MAX_DIM {
        jacobi(a)?.0
    } else {
        let mut v = a.as_slice().to_vec();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tred2(n, &mut v, &mut d, &mut e, false);
        tql2(n, &mut d, &mut e, None)?;
        d
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn check_input(a: &SymMatrix, tol: f64) -> Result<(), LinalgError> {
    if a.dim() == 0 {
        return Err(LinalgError::InvalidArgument("empty matrix"));
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument("tolerance must be positive"));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::InvalidArgument("non-finite matrix entry"));
    }
    Ok(())
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

/// Cyclic Jacobi with threshold; returns unsorted values and row-major eigenvector columns.
fn jacobi(m: &SymMatrix) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d = m.diagonal();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    #[inline]
    fn rotate(a: &mut [f64], s: f64, tau: f64, x: usize, y: usize) {
        let g = a[x];
        let h = a[y];
        a[x] = g - s * (h + g * tau);
        a[y] = h + s * (g - h * tau);
    }

    for sweep in 1..=JACOBI_MAX_SWEEPS {
        let mut sm = 0.0;
        for ip in 0..n {
            for iq in (ip + 1)..n {
                sm += a[ip * n + iq].abs();
            }
        }
        if sm == 0.0 {
            return Ok((d, v));
        }
        let tresh = if sweep < 4 { 0.2 * sm / (n * n) as f64 } else { 0.0 };
        for ip in 0..n {
            for iq in (ip + 1)..n {
                let apq = a[ip * n + iq];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[ip].abs() + g == d[ip].abs() && d[iq].abs() + g == d[iq].abs() {
                    a[ip * n + iq] = 0.0;
                } else if apq.abs() > tresh {
                    let h = d[iq] - d[ip];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let t = 1.0 / (theta.abs() + math::sqrt(1.0 + theta * theta));
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[ip] -= h;
                    z[iq] += h;
                    d[ip] -= h;
                    d[iq] += h;
                    a[ip * n + iq] = 0.0;
                    for j in 0..ip {
                        rotate(&mut a, s, tau, j * n + ip, j * n + iq);
                    }
                    for j in (ip + 1)..iq {
                        rotate(&mut a, s, tau, ip * n + j, j * n + iq);
                    }
                    for j in (iq + 1)..n {
                        rotate(&mut a, s, tau, ip * n + j, iq * n + j);
                    }
                    for j in 0..n {
                        rotate(&mut v, s, tau, j * n + ip, j * n + iq);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    let mut off = 0.0;
    for ip in 0..n {
        for iq in (ip + 1)..n {
            off += a[ip * n + iq] * a[ip * n + iq];
        }
    }
    Err(LinalgError::NoConvergence { method: "jacobi", off_norm: math::sqrt(2.0 * off) })
}

/// Householder reduction to tridiagonal form. On exit `d` is the diagonal and
/// `e[1..]` the subdiagonal; `v` holds the accumulated transform when requested.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[j * n + j];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; rotations are applied to `v` when given.
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>) -> Result<(), LinalgError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_iter = 50 * n;
    let mut iters = 0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iters += 1;
                if iters > max_iter {
                    let off = math::sqrt(e.iter().map(|x| x * x).sum());
                    return Err(LinalgError::NoConvergence { method: "tql2", off_norm: off });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let vk = &mut v[k * n..(k + 1) * n];
                            let h = vk[i + 1];
                            vk[i + 1] = s * vk[i] + c * h;
                            vk[i] = c * vk[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
