//! Numerical kernels for generalized mass lumping.
//!
//! The crate covers the row-sum lumping operator and its banded family
//! `P_i = D_i + L(R_i)`, Kronecker-structured preconditioners `P_ij` / `P_ijk`,
//! the nearest Kronecker product (NKP) approximation of a mass matrix,
//! generalized symmetric-definite eigenproblems with their perturbation
//! bounds, a tensor-product B-spline Galerkin discretization of the wave
//! equation, and Newmark time integration.
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration and
//! the experiment runner live in the `lumplab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod linalg;
pub mod lumping;
mod math;
pub mod nkp;
pub mod pencil;
pub mod precision;
pub mod splinefem;

pub use linalg::{
    BandedSpd, Cholesky, EigResult, Factor, KronOperator, KronTerm, LinalgError, MassOperator,
    Matrix, SvdResult, SymMatrix,
};
pub use pencil::{BoundEntry, BoundReport, GenEigResult, Pencil, PencilError};

/// Default relative tolerance for eigen and singular value iterations.
pub const DEFAULT_TOL: f64 = 1e-12;
