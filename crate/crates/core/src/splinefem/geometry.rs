use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{FemError, SplineSpace};
use crate::math;

/// Maps from the parametric cube onto the physical domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryMap {
    UnitInterval,
    UnitSquare,
    UnitCube,
    /// `F(ξ, η) = ((1 + ξ) cos(πη/2), (1 + ξ) sin(πη/2))`, radii 1 and 2.
    QuarterAnnulus,
    ControlNet(ControlNet),
}

/// Planar tensor-product B-spline map given by its control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlNet {
    pub id: String,
    pub degrees: [usize; 2],
    pub subdivisions: [usize; 2],
    /// `(m₁ + p₁)(m₂ + p₂)` points, index `i₁ n₂ + i₂`.
    pub points: Vec<[f64; 2]>,
}

impl ControlNet {
    pub fn validate(&self) -> Result<(), FemError> {
        let s = self.spaces()?;
        let expected = s[0].dim() * s[1].dim();
        if self.points.len() != expected {
            return Err(FemError::DimensionMismatch { expected, got: self.points.len() });
        }
        Ok(())
    }

    fn spaces(&self) -> Result<[SplineSpace; 2], FemError> {
        Ok([
            SplineSpace::new(self.degrees[0], self.subdivisions[0])?,
            SplineSpace::new(self.degrees[1], self.subdivisions[1])?,
        ])
    }

    /// Point and Jacobian `J[r][c] = ∂x_r/∂ξ_c`.
    fn eval(&self, xi: f64, eta: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let [s1, s2] = self.spaces().expect("validated control net");
        let (b1, b2) = (s1.eval_on_element(s1.element_of(xi), xi), s2.eval_on_element(s2.element_of(eta), eta));
        let n2 = s2.dim();
        let mut x = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for (a, (v1, d1)) in b1.values.iter().zip(&b1.derivatives).enumerate() {
            for (b, (v2, d2)) in b2.values.iter().zip(&b2.derivatives).enumerate() {
                let p = self.points[(b1.first + a) * n2 + b2.first + b];
                for r in 0..2 {
                    x[r] += v1 * v2 * p[r];
                    j[r][0] += d1 * v2 * p[r];
                    j[r][1] += v1 * d2 * p[r];
                }
            }
        }
        (x, j)
    }
}

pub type DetFactor = fn(f64) -> f64;

impl GeometryMap {
    pub fn id(&self) -> &str {
        match self {
            GeometryMap::UnitInterval => "unit_interval",
            GeometryMap::UnitSquare => "unit_square",
            GeometryMap::UnitCube => "unit_cube",
            GeometryMap::QuarterAnnulus => "quarter_annulus",
            GeometryMap::ControlNet(net) => &net.id,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            GeometryMap::UnitInterval => 1,
            GeometryMap::UnitCube => 3,
            _ => 2,
        }
    }

    /// Physical image of a parametric point.
    pub fn point(&self, xi: &[f64]) -> Vec<f64> {
        match self {
            GeometryMap::UnitInterval | GeometryMap::UnitSquare | GeometryMap::UnitCube => xi.to_vec(),
            GeometryMap::QuarterAnnulus => {
                let r = 1.0 + xi[0];
                let t = FRAC_PI_2 * xi[1];
                vec![r * math::cos(t), r * math::sin(t)]
            }
            GeometryMap::ControlNet(net) => net.eval(xi[0], xi[1]).0.to_vec(),
        }
    }

    /// Jacobian of a planar map.
    pub fn jacobian2(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        match self {
            GeometryMap::QuarterAnnulus => {
                let r = 1.0 + xi;
                let t = FRAC_PI_2 * eta;
                let (s, c) = (math::sin(t), math::cos(t));
                [[c, -r * FRAC_PI_2 * s], [s, r * FRAC_PI_2 * c]]
            }
            GeometryMap::ControlNet(net) => net.eval(xi, eta).1,
            _ => [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn det_jacobian(&self, xi: &[f64]) -> f64 {
        match self {
            GeometryMap::UnitInterval | GeometryMap::UnitSquare | GeometryMap::UnitCube => 1.0,
            _ => {
                let j = self.jacobian2(xi[0], xi[1]);
                j[0][0] * j[1][1] - j[0][1] * j[1][0]
            }
        }
    }

    /// Per-direction factors `g_d` with `det J(ξ) = Π_d g_d(ξ_d)`, when the map
    /// has that structure.
    pub fn separable_det(&self) -> Option<Vec<DetFactor>> {
        fn one(_: f64) -> f64 {
            1.0
        }
        fn annulus_radial(xi: f64) -> f64 {
            FRAC_PI_2 * (1.0 + xi)
        }
        match self {
            GeometryMap::UnitInterval => Some(vec![one]),
            GeometryMap::UnitSquare => Some(vec![one, one]),
            GeometryMap::UnitCube => Some(vec![one, one, one]),
            GeometryMap::QuarterAnnulus => Some(vec![annulus_radial, one]),
            GeometryMap::ControlNet(_) => None,
        }
    }
}
