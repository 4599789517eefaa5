//! Scalar abstraction and double-double refinement of 1D eigenfrequencies.
//!
//! [`refined_frequency_1d`] assembles the 1D matrices in double-double
//! arithmetic and evaluates the Rayleigh quotient of an `f64` eigenvector in
//! that precision.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use twofloat::TwoFloat;

use crate::linalg::SymMatrix;
use crate::pencil::{gen_eig, Pencil, PencilError};
use crate::splinefem::{assemble_1d_generic, EndConditions, SplineSpace};
use crate::{math, DEFAULT_TOL};

/// Real arithmetic used by the generic basis, quadrature and 1D assembly code.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        math::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Double-double number. Wraps [`TwoFloat`] and refines its quotient, which
/// on its own is only accurate to about one `f64` ulp.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dd(pub TwoFloat);

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0 + rhs.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0 - rhs.0)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        Dd(self.0 * rhs.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q = self.0 / rhs.0;
        let r = self.0 - q * rhs.0;
        Dd(q + r / rhs.0)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dd {
    #[inline]
    fn mul_assign(&mut self, rhs: Dd) {
        *self = *self * rhs;
    }
}

impl Scalar for Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd(TwoFloat::from_f64(x))
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.0.hi() + self.0.lo()
    }
    #[inline]
    fn sqrt(self) -> Self {
        Dd(self.0.sqrt())
    }
    #[inline]
    fn abs(self) -> Self {
        Dd(self.0.abs())
    }
}

/// Mass approximation whose 1D eigenfrequency is refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Consistent,
    /// Banded member `P_i` with band index `i ≥ 1`.
    Banded(usize),
}

/// `ω_{h,k} = √λ_k(K, M̃)` for a unit-density 1D problem on the unit interval,
/// with the eigenvalue refined by a double-double Rayleigh quotient.
pub fn refined_frequency_1d(
    space: &SplineSpace,
    ends: EndConditions,
    kind: MassKind,
    k: usize,
) -> Result<f64, PencilError> {
    let (m_dd, k_dd) = reduced_dd(space, ends);
    let n = k_dd.len();
    let m_tilde = match kind {
        MassKind::Consistent => m_dd,
        MassKind::Banded(i) => banded_member_dd(&m_dd, i.min(n)),
    };
    let to_sym = |a: &[Vec<Dd>]| SymMatrix::from_fn(n, |i, j| a[i][j].to_f64());
    let pencil = Pencil::new(to_sym(&k_dd), to_sym(&m_tilde))?;
    let r = gen_eig(&pencil, DEFAULT_TOL)?;
    let u: Vec<Dd> = r.vector(k).into_iter().map(Dd::from_f64).collect();
    let num = quad_form(&k_dd, &u);
    let den = quad_form(&m_tilde, &u);
    Ok((num / den).sqrt().to_f64())
}

fn reduced_dd(space: &SplineSpace, ends: EndConditions) -> (Vec<Vec<Dd>>, Vec<Vec<Dd>>) {
    let one = |_: Dd| Dd::one();
    let (m, k) = assemble_1d_generic::<Dd>(space, &one, &one);
    let free = ends.free_indices(space.dim());
    let pick = |a: &[Vec<Dd>]| -> Vec<Vec<Dd>> {
        free.iter().map(|&i| free.iter().map(|&j| a[i][j]).collect()).collect()
    };
    (pick(&m), pick(&k))
}

/// `P_i = D_i + L(R_i)` evaluated in double-double.
fn banded_member_dd(b: &[Vec<Dd>], i: usize) -> Vec<Vec<Dd>> {
    let n = b.len();
    let mut p = vec![vec![Dd::zero(); n]; n];
    for r in 0..n {
        let mut lumped = Dd::zero();
        for c in 0..n {
            if r.abs_diff(c) < i {
                p[r][c] = b[r][c];
            } else {
                lumped += b[r][c].abs();
            }
        }
        p[r][r] += lumped;
    }
    p
}

fn quad_form(a: &[Vec<Dd>], u: &[Dd]) -> Dd {
    let mut s = Dd::zero();
    for (row, ui) in a.iter().zip(u) {
        let mut t = Dd::zero();
        for (aij, uj) in row.iter().zip(u) {
            t += *aij * *uj;
        }
        s += *ui * t;
    }
    s
}
