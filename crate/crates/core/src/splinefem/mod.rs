//! Tensor-product B-spline Galerkin discretization of the scalar wave equation.

mod assembly;
mod density;
mod exact;
mod geometry;
mod model;
mod quadrature;
mod space;

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::LinalgError;

pub use assembly::{assemble_1d, assemble_1d_generic, assemble_1d_weighted, assemble_2d, assemble_3d_unit_cube};
pub use density::Density;
pub use exact::{annulus_forcing, annulus_solution, annulus_velocity0, exact_eigenfrequency, string_solution, ProblemId};
pub use geometry::{ControlNet, GeometryMap};
pub use model::{l2_error, DiscreteModel};
pub use quadrature::{gauss_legendre, gauss_legendre_generic, map_rule};
pub use space::{BasisEval, SplineSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum FemError {
    InvalidSpace(&'static str),
    OutOfDomain(f64),
    SingularGeometry { point: [f64; 3], det: f64 },
    NonPositiveDensity { point: [f64; 3], value: f64 },
    DimensionMismatch { expected: usize, got: usize },
    UnknownProblem,
    Unsupported(&'static str),
    Linalg(LinalgError),
}

impl fmt::Display for FemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FemError::InvalidSpace(why) => write!(f, "invalid spline space: {why}"),
            FemError::OutOfDomain(x) => write!(f, "parametric coordinate {x} outside [0, 1]"),
            FemError::SingularGeometry { point, det } => {
                write!(f, "singular geometry map at {point:?}: det J = {det:e}")
            }
            FemError::NonPositiveDensity { point, value } => {
                write!(f, "density {value} is not positive at {point:?}")
            }
            FemError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            FemError::UnknownProblem => f.write_str("unknown problem id"),
            FemError::Unsupported(what) => write!(f, "unsupported: {what}"),
            FemError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FemError {}

impl From<LinalgError> for FemError {
    fn from(e: LinalgError) -> Self {
        FemError::Linalg(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Dirichlet,
    Natural,
}

/// Boundary conditions at `x = 0` and `x = 1` of one parametric direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndConditions {
    pub left: End,
    pub right: End,
}

impl EndConditions {
    pub const fn new(left: End, right: End) -> Self {
        EndConditions { left, right }
    }

    pub const fn dirichlet() -> Self {
        Self::new(End::Dirichlet, End::Dirichlet)
    }

    pub const fn natural() -> Self {
        Self::new(End::Natural, End::Natural)
    }

    /// Indices of the basis functions kept after eliminating Dirichlet ends.
    pub fn free_indices(&self, n: usize) -> Vec<usize> {
        let lo = usize::from(self.left == End::Dirichlet);
        let hi = n - usize::from(self.right == End::Dirichlet);
        (lo..hi.max(lo)).collect()
    }
}
