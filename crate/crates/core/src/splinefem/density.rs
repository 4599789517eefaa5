use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

/// Mass density over the physical domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    Constant(f64),
    /// `ρ(x, y) = |sin(xy)| + x + y + 1`
    SinProduct,
    /// Values at the assembly quadrature points, element-major (elements in
    /// row-major order, then points in row-major order within the element).
    Tabulated(Vec<f64>),
}

impl Density {
    pub fn id(&self) -> &'static str {
        match self {
            Density::Constant(_) => "constant",
            Density::SinProduct => "sin_product",
            Density::Tabulated(_) => "tabulated",
        }
    }

    /// Density at physical point `x`, which is quadrature point `qp` of the assembly loop.
    pub fn value(&self, x: &[f64], qp: usize) -> f64 {
        match self {
            Density::Constant(c) => *c,
            Density::SinProduct => {
                let (a, b) = (x[0], x.get(1).copied().unwrap_or(0.0));
                math::sin(a * b).abs() + a + b + 1.0
            }
            Density::Tabulated(v) => v[qp],
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            Density::Constant(c) => Some(*c),
            _ => None,
        }
    }
}
