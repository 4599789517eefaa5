use alloc::vec;
use alloc::vec::Vec;

use super::assembly::inverse_jacobian;
use super::quadrature::{for_each_tensor_point, tensor_basis};
use super::{Density, EndConditions, FemError, GeometryMap, SplineSpace};
use crate::linalg::{cholesky, Factor, KronOperator, MassOperator, SymMatrix};
use crate::math;

/// Assembled Galerkin model. `mass` and `stiffness` act on the free DOFs;
/// the `_full` matrices keep every basis function.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    pub(crate) spaces: Vec<SplineSpace>,
    pub(crate) ends: Vec<EndConditions>,
    pub(crate) geometry: GeometryMap,
    pub(crate) density: Density,
    pub(crate) mass_full: SymMatrix,
    pub(crate) stiffness_full: SymMatrix,
    pub(crate) free: Vec<usize>,
    pub(crate) mass: SymMatrix,
    pub(crate) stiffness: SymMatrix,
    pub(crate) mass_factors: Option<Vec<SymMatrix>>,
    pub(crate) quadrature_mass: f64,
}

impl DiscreteModel {
    pub fn spaces(&self) -> &[SplineSpace] {
        &self.spaces
    }

    pub fn ends(&self) -> &[EndConditions] {
        &self.ends
    }

    pub fn geometry(&self) -> &GeometryMap {
        &self.geometry
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn param_dim(&self) -> usize {
        self.spaces.len()
    }

    pub fn mass(&self) -> &SymMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymMatrix {
        &self.stiffness
    }

    pub fn mass_full(&self) -> &SymMatrix {
        &self.mass_full
    }

    pub fn stiffness_full(&self) -> &SymMatrix {
        &self.stiffness_full
    }

    /// Free DOFs as row-major indices into the full tensor basis.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(SplineSpace::dim).collect()
    }

    /// Per-direction counts of free DOFs; their product is `n_free`.
    pub fn free_dims(&self) -> Vec<usize> {
        self.spaces.iter().zip(&self.ends).map(|(s, e)| e.free_indices(s.dim()).len()).collect()
    }

    pub fn is_separable(&self) -> bool {
        self.mass_factors.is_some()
    }

    /// Reduced factors with `M = M₁ ⊗ … ⊗ M_d` when separable.
    pub fn mass_factors(&self) -> Option<&[SymMatrix]> {
        self.mass_factors.as_deref()
    }

    pub fn mass_kron(&self) -> Option<KronOperator> {
        let f = self.mass_factors.as_ref()?;
        KronOperator::single(f.iter().cloned().map(Factor::Dense).collect()).ok()
    }

    /// Kronecker form when separable, dense otherwise.
    pub fn mass_operator(&self) -> MassOperator {
        match self.mass_kron() {
            Some(k) => MassOperator::Kron(k),
            None => MassOperator::Dense(self.mass.clone()),
        }
    }

    /// `∫ ρ |det J|` by the assembly quadrature.
    pub fn total_mass(&self) -> f64 {
        self.quadrature_mass
    }

    /// Embeds free-DOF coefficients into the full basis with zeros on Dirichlet ends.
    pub fn expand(&self, coeffs: &[f64]) -> Result<Vec<f64>, FemError> {
        self.check_len(coeffs)?;
        let mut full = vec![0.0; self.mass_full.dim()];
        for (&i, &c) in self.free.iter().zip(coeffs) {
            full[i] = c;
        }
        Ok(full)
    }

    /// `b_i = ∫ f B_i |det J|` over the free DOFs.
    pub fn load_vector(&self, f: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
        let full = self.integrate_against_basis(|x, _| f(x));
        self.free.iter().map(|&i| full[i]).collect()
    }

    /// L² projection in the ρ-weighted inner product: solves `M c = ∫ ρ u B_i |det J|`.
    pub fn project(&self, u: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>, FemError> {
        let full = self.integrate_against_basis(|x, q| self.density.value(x, q) * u(x));
        let rhs: Vec<f64> = self.free.iter().map(|&i| full[i]).collect();
        Ok(cholesky(&self.mass)?.solve(&rhs))
    }

    fn integrate_against_basis(&self, f: impl Fn(&[f64], usize) -> f64) -> Vec<f64> {
        let dims = self.dims();
        let npts: Vec<usize> = self.spaces.iter().map(|s| s.degree() + 1).collect();
        let mut out = vec![0.0; self.mass_full.dim()];
        let mut basis = Vec::new();
        for_each_tensor_point(&self.spaces, &npts, |tp| {
            let (det, _) = inverse_jacobian(&self.geometry, tp.xhat);
            let x = self.geometry.point(tp.xhat);
            let v = tp.weight * det.abs() * f(&x, tp.index);
            tensor_basis(tp.evals, &dims, &mut basis);
            for b in &basis {
                out[b.index] += v * b.value;
            }
        });
        out
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<(), FemError> {
        if coeffs.len() != self.free.len() {
            return Err(FemError::DimensionMismatch { expected: self.free.len(), got: coeffs.len() });
        }
        Ok(())
    }
}

/// `‖u_h − u‖_{L²(Ω)}` with `p + 2` Gauss points per element and direction.
pub fn l2_error(model: &DiscreteModel, coeffs: &[f64], exact: &dyn Fn(&[f64]) -> f64) -> Result<f64, FemError> {
    let full = model.expand(coeffs)?;
    let dims = model.dims();
    let npts: Vec<usize> = model.spaces.iter().map(|s| s.degree() + 2).collect();
    let mut sum = 0.0;
    let mut basis = Vec::new();
    for_each_tensor_point(&model.spaces, &npts, |tp| {
        let (det, _) = inverse_jacobian(&model.geometry, tp.xhat);
        let x = model.geometry.point(tp.xhat);
        tensor_basis(tp.evals, &dims, &mut basis);
        let uh: f64 = basis.iter().map(|b| full[b.index] * b.value).sum();
        let e = uh - exact(&x);
        sum += tp.weight * det.abs() * e * e;
    });
    Ok(math::sqrt(sum))
}
