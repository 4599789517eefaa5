use alloc::vec;
use alloc::vec::Vec;

use super::{BasisEval, SplineSpace};
use crate::math;
use crate::precision::Scalar;

/// Gauss–Legendre rule on `[-1, 1]` as `(nodes, weights)`, nodes ascending.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre_generic::<f64>(npts)
}

/// Newton iteration on the Legendre three-term recurrence, carried out in `T`.
pub fn gauss_legendre_generic<T: Scalar>(npts: usize) -> (Vec<T>, Vec<T>) {
    assert!(npts >= 1, "at least one quadrature point");
    let n = npts;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let two = T::from_f64(2.0);
    for i in 0..n.div_ceil(2) {
        let guess = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut z = T::from_f64(guess);
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs().to_f64() <= 1e-34 * (1.0 + z.abs().to_f64()) {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d.to_f64() != 0.0 {
            dp = d;
        }
        let w = two / ((T::one() - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// `(P_n(z), P_n'(z))`
fn legendre<T: Scalar>(n: usize, z: T) -> (T, T) {
    let mut p1 = T::one();
    let mut p2 = T::zero();
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = T::from_usize(j);
        p1 = ((T::from_usize(2 * j + 1)) * z * p2 - jf * p3) / T::from_usize(j + 1);
    }
    let nf = T::from_usize(n);
    let dp = nf * (z * p1 - p2) / (z * z - T::one());
    (p1, dp)
}

/// Maps a reference rule onto `[a, b]`.
pub fn map_rule<T: Scalar>(nodes: &[T], weights: &[T], a: T, b: T) -> (Vec<T>, Vec<T>) {
    let half = T::from_f64(0.5);
    let mid = (a + b) * half;
    let rad = (b - a) * half;
    (nodes.iter().map(|&x| mid + rad * x).collect(), weights.iter().map(|&w| w * rad).collect())
}

/// One point of a tensor-product Gauss rule over all elements.
pub(crate) struct TensorPoint<'a> {
    pub xhat: &'a [f64],
    /// Product of the 1D weights (parametric measure only).
    pub weight: f64,
    /// Running index: elements row-major, then points row-major within the element.
    pub index: usize,
    pub evals: &'a [&'a BasisEval],
}

/// Tensor-product basis function nonzero at a point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TensorBasis {
    pub index: usize,
    pub value: f64,
    pub grad: [f64; 3],
}

/// Visits every quadrature point with `npts[d]` Gauss points per element in direction `d`.
pub(crate) fn for_each_tensor_point(spaces: &[SplineSpace], npts: &[usize], mut f: impl FnMut(&TensorPoint<'_>)) {
    let d = spaces.len();
    let tables: Vec<Vec<Vec<(f64, f64, BasisEval)>>> = spaces
        .iter()
        .zip(npts)
        .map(|(s, &q)| {
            let (xr, wr) = gauss_legendre(q);
            (0..s.subdivisions())
                .map(|e| {
                    let (a, b) = s.element_bounds::<f64>(e);
                    let (xs, ws) = map_rule(&xr, &wr, a, b);
                    xs.iter().zip(&ws).map(|(&x, &w)| (x, w, s.eval_on_element(e, x))).collect()
                })
                .collect()
        })
        .collect();
    let elems: Vec<usize> = spaces.iter().map(SplineSpace::subdivisions).collect();
    let n_el: usize = elems.iter().product();
    let n_pt: usize = npts.iter().product();
    let mut e_idx = vec![0; d];
    let mut q_idx = vec![0; d];
    let mut xhat = vec![0.0; d];
    let mut index = 0;
    for el in 0..n_el {
        decode(el, &elems, &mut e_idx);
        for qp in 0..n_pt {
            decode(qp, npts, &mut q_idx);
            let mut weight = 1.0;
            let mut evals = Vec::with_capacity(d);
            for k in 0..d {
                let (x, w, ref b) = tables[k][e_idx[k]][q_idx[k]];
                xhat[k] = x;
                weight *= w;
                evals.push(b);
            }
            f(&TensorPoint { xhat: &xhat, weight, index, evals: &evals });
            index += 1;
        }
    }
}

/// Tensor products of the nonzero 1D functions with parametric gradients.
/// Global indices are row-major over `dims`.
pub(crate) fn tensor_basis(evals: &[&BasisEval], dims: &[usize], out: &mut Vec<TensorBasis>) {
    out.clear();
    let d = evals.len();
    let lens: Vec<usize> = evals.iter().map(|b| b.values.len()).collect();
    let total: usize = lens.iter().product();
    let mut loc = vec![0; d];
    for l in 0..total {
        decode(l, &lens, &mut loc);
        let mut index = 0;
        let mut value = 1.0;
        let mut grad = [1.0; 3];
        for k in 0..d {
            let b = evals[k];
            index = index * dims[k] + b.first + loc[k];
            value *= b.values[loc[k]];
            for (c, g) in grad.iter_mut().enumerate().take(d) {
                *g *= if c == k { b.derivatives[loc[k]] } else { b.values[loc[k]] };
            }
        }
        for g in grad.iter_mut().skip(d) {
            *g = 0.0;
        }
        out.push(TensorBasis { index, value, grad });
    }
}

fn decode(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}
