//! Eigenvalue enclosures and perturbation bounds for pairs of pencils.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{gen_eig, gen_eigvals, Pencil, PencilError};
use crate::linalg::{norm2, sym_eigvals, SymMatrix};
use crate::DEFAULT_TOL;

pub const SANDWICH_A: &str = "sandwich_a";
pub const SANDWICH_B: &str = "sandwich_b";
pub const RATIO: &str = "ratio";
pub const BAUER_FIKE_A: &str = "bauer_fike_a";
pub const BAUER_FIKE_B: &str = "bauer_fike_b";
pub const CRAWFORD: &str = "crawford";

/// One checked inequality `lower ≤ lambda ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    /// 1-based eigenvalue index.
    pub k: usize,
    /// The attained quantity.
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound_name: String,
    /// Magnitude used to scale the comparison tolerance.
    pub scale: f64,
}

impl BoundEntry {
    fn new(k: usize, lambda: f64, lower: f64, upper: f64, name: &str, scale: f64) -> Self {
        BoundEntry { k, lambda, lower, upper, bound_name: name.to_string(), scale }
    }

    /// True when the inequality holds up to `rel_tol · max(scale, 1)`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.scale.abs().max(1.0);
        self.lambda >= self.lower - slack && self.lambda <= self.upper + slack
    }
}

/// A list of bound checks, usually several per eigenvalue index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn violations(&self, rel_tol: f64) -> Vec<&BoundEntry> {
        self.entries.iter().filter(|e| !e.holds(rel_tol)).collect()
    }

    pub fn all_hold(&self, rel_tol: f64) -> bool {
        self.entries.iter().all(|e| e.holds(rel_tol))
    }

    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a BoundEntry> + 'a {
        self.entries.iter().filter(move |e| e.bound_name == name)
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.entries.extend(other.entries);
    }
}

fn check_dims(mats: &[&SymMatrix]) -> Result<usize, PencilError> {
    let n = mats[0].dim();
    for m in mats {
        if m.dim() != n {
            return Err(PencilError::DimensionMismatch { a: n, b: m.dim() });
        }
    }
    Ok(n)
}

/// Both chains `λ_k(A,C) λ_1(C,B) ≤ λ_k(A,B) ≤ λ_k(A,C) λ_n(C,B)` and
/// `λ_1(A,C) λ_k(C,B) ≤ λ_k(A,B) ≤ λ_n(A,C) λ_k(C,B)`.
pub fn sandwich_bounds(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> Result<BoundReport, PencilError> {
    let n = check_dims(&[a, b, c])?;
    let ab = gen_eigvals(a, b)?;
    let ac = gen_eigvals(a, c)?;
    let cb = gen_eigvals(c, b)?;
    let mut entries = Vec::with_capacity(2 * n);
    for k in 0..n {
        entries.push(BoundEntry::new(k + 1, ab[k], ac[k] * cb[0], ac[k] * cb[n - 1], SANDWICH_A, ab[k]));
        entries.push(BoundEntry::new(k + 1, ab[k], ac[0] * cb[k], ac[n - 1] * cb[k], SANDWICH_B, ab[k]));
    }
    Ok(BoundReport { entries })
}

/// `λ_1(M, M̃) ≤ λ_k(K, M̃) / λ_k(K, M) ≤ λ_n(M, M̃)` for every `k`.
pub fn ratio_bounds(k: &SymMatrix, m: &SymMatrix, mt: &SymMatrix) -> Result<BoundReport, PencilError> {
    let n = check_dims(&[k, m, mt])?;
    let km = gen_eigvals(k, m)?;
    let kmt = gen_eigvals(k, mt)?;
    let mmt = gen_eigvals(m, mt)?;
    let entries = (0..n)
        .map(|i| BoundEntry::new(i + 1, kmt[i] / km[i], mmt[0], mmt[n - 1], RATIO, 1.0))
        .collect();
    Ok(BoundReport { entries })
}

/// Residual-based perturbation bounds between `(A, B)` and `(Ã, B̃)`.
///
/// For every `i` three entries are produced: the distance from `λ_i` to the
/// nearest perturbed eigenvalue against the eigenvector residual bound, the
/// same with the pencils swapped, and `|λ̃_i − λ_i|` against the uniform bound
/// `(‖E‖₂ + |λ_i| ‖F‖₂) / λ_1(B̃)`.
pub fn bauer_fike_bounds(p: &Pencil, pt: &Pencil) -> Result<BoundReport, PencilError> {
    let n = check_dims(&[p.a(), pt.a()])?;
    let e = pt.a().sub(p.a());
    let f = pt.b().sub(p.b());
    let r = gen_eig(p, DEFAULT_TOL)?;
    let rt = gen_eig(pt, DEFAULT_TOL)?;
    let b_min = sym_eigvals(p.b())?[0];
    let bt_min = sym_eigvals(pt.b())?[0];
    let e2 = spectral_norm(&e)?;
    let f2 = spectral_norm(&f)?;

    let residual_bound = |lam: f64, u: &[f64], bmin: f64| {
        let un = norm2(u);
        (norm2(&e.matvec(u)) + lam.abs() * norm2(&f.matvec(u))) / (un * bmin)
    };
    let nearest = |x: f64, set: &[f64]| set.iter().fold(f64::INFINITY, |m, &y| m.min((y - x).abs()));

    let mut entries = Vec::with_capacity(3 * n);
    for i in 0..n {
        let (lam, lamt) = (r.values[i], rt.values[i]);
        let u = r.vector(i);
        let ut = rt.vector(i);
        let scale = lam.abs().max(lamt.abs());
        entries.push(BoundEntry::new(
            i + 1,
            nearest(lam, &rt.values),
            0.0,
            residual_bound(lam, &u, bt_min),
            BAUER_FIKE_A,
            scale,
        ));
        entries.push(BoundEntry::new(
            i + 1,
            nearest(lamt, &r.values),
            0.0,
            residual_bound(lamt, &ut, b_min),
            BAUER_FIKE_B,
            scale,
        ));
        entries.push(BoundEntry::new(
            i + 1,
            (lamt - lam).abs(),
            0.0,
            (e2 + lam.abs() * f2) / bt_min,
            CRAWFORD,
            scale,
        ));
    }
    Ok(BoundReport { entries })
}

fn spectral_norm(m: &SymMatrix) -> Result<f64, PencilError> {
    if m.frobenius_norm() == 0.0 {
        return Ok(0.0);
    }
    Ok(m.norm2()?)
}
