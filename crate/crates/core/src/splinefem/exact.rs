use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FemError;
use crate::math;

/// Reference eigenproblems with known lowest eigenfrequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemId {
    /// `-u'' = ω² u` on (0, 1), `u(0) = 0`, `u'(1) = 0`.
    #[serde(rename = "laplace_1d_mixed")]
    Laplace1dMixed,
    /// Mixed conditions in both directions of the unit square.
    #[serde(rename = "laplace_2d_mixed")]
    Laplace2dMixed,
    #[serde(rename = "laplace_1d_dirichlet")]
    Laplace1dDirichlet,
}

impl ProblemId {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Laplace1dMixed => "laplace_1d_mixed",
            ProblemId::Laplace2dMixed => "laplace_2d_mixed",
            ProblemId::Laplace1dDirichlet => "laplace_1d_dirichlet",
        }
    }

    pub fn lowest_frequency(self) -> f64 {
        match self {
            ProblemId::Laplace1dMixed => FRAC_PI_2,
            ProblemId::Laplace2dMixed => PI / SQRT_2,
            ProblemId::Laplace1dDirichlet => PI,
        }
    }
}

impl FromStr for ProblemId {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self, FemError> {
        match s {
            "laplace_1d_mixed" => Ok(ProblemId::Laplace1dMixed),
            "laplace_2d_mixed" => Ok(ProblemId::Laplace2dMixed),
            "laplace_1d_dirichlet" => Ok(ProblemId::Laplace1dDirichlet),
            _ => Err(FemError::UnknownProblem),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn exact_eigenfrequency(id: &str) -> Result<f64, FemError> {
    Ok(id.parse::<ProblemId>()?.lowest_frequency())
}

/// Standing wave `sin(4πx) cos(4πt)` on the unit interval with fixed ends.
pub fn string_solution(x: f64, t: f64) -> f64 {
    math::sin(4.0 * PI * x) * math::cos(4.0 * PI * t)
}

/// Spatial part `g(x, y) = (r² − 1)(r² − 4) sin x sin y` of the annulus solution.
fn annulus_shape(x: f64, y: f64) -> f64 {
    let s = x * x + y * y;
    (s - 1.0) * (s - 4.0) * math::sin(x) * math::sin(y)
}

/// `u = g(x, y) sin(2πt)`, vanishing on the whole boundary of the quarter annulus.
pub fn annulus_solution(x: f64, y: f64, t: f64) -> f64 {
    annulus_shape(x, y) * math::sin(2.0 * PI * t)
}

/// `∂_t u` at `t = 0`.
pub fn annulus_velocity0(x: f64, y: f64) -> f64 {
    2.0 * PI * annulus_shape(x, y)
}

/// `f = ∂_tt u − Δu`.
pub fn annulus_forcing(x: f64, y: f64, t: f64) -> f64 {
    let s = x * x + y * y;
    let q = (s - 1.0) * (s - 4.0);
    let (sx, cx, sy, cy) = (math::sin(x), math::cos(x), math::sin(y), math::cos(y));
    let h = sx * sy;
    let lap = h * (16.0 * s - 20.0) + 2.0 * (4.0 * s - 10.0) * (x * cx * sy + y * sx * cy) - 2.0 * q * h;
    (-4.0 * PI * PI * q * h - lap) * math::sin(2.0 * PI * t)
}
