use alloc::vec;
use alloc::vec::Vec;

use super::quadrature::{for_each_tensor_point, tensor_basis};
use super::{
    gauss_legendre_generic, map_rule, Density, DiscreteModel, EndConditions, FemError, GeometryMap, SplineSpace,
};
use crate::linalg::{LinalgError, SymMatrix, DEFAULT_DENSE_CAP};
use crate::precision::Scalar;

/// Below this `|det J|` a quadrature point is treated as singular.
const SINGULAR_DET: f64 = 1e-14;

/// Full 1D mass and stiffness matrices (no boundary elimination) with weights
/// `∫ w_mass B_i B_j` and `∫ w_stiff B_i' B_j'`, carried out in `T`.
pub fn assemble_1d_generic<T: Scalar>(
    space: &SplineSpace,
    w_mass: &dyn Fn(T) -> T,
    w_stiff: &dyn Fn(T) -> T,
) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let p = space.degree();
    let n = space.dim();
    let (xr, wr) = gauss_legendre_generic::<T>(p + 1);
    let mut m = vec![vec![T::zero(); n]; n];
    let mut k = vec![vec![T::zero(); n]; n];
    for e in 0..space.subdivisions() {
        let (a, b) = space.element_bounds::<T>(e);
        let (xs, ws) = map_rule(&xr, &wr, a, b);
        for (&x, &w) in xs.iter().zip(&ws) {
            let be = space.eval_on_element(e, x);
            let wm = w * w_mass(x);
            let wk = w * w_stiff(x);
            for la in 0..=p {
                let i = be.first + la;
                for lb in la..=p {
                    let j = be.first + lb;
                    let vm = wm * be.values[la] * be.values[lb];
                    let vk = wk * be.derivatives[la] * be.derivatives[lb];
                    m[i][j] += vm;
                    k[i][j] += vk;
                    if i != j {
                        m[j][i] += vm;
                        k[j][i] += vk;
                    }
                }
            }
        }
    }
    (m, k)
}

/// `f64` version of [`assemble_1d_generic`] returning symmetric matrices.
pub fn assemble_1d_weighted(
    space: &SplineSpace,
    w_mass: &dyn Fn(f64) -> f64,
    w_stiff: &dyn Fn(f64) -> f64,
) -> (SymMatrix, SymMatrix) {
    let (m, k) = assemble_1d_generic::<f64>(space, w_mass, w_stiff);
    let n = space.dim();
    (SymMatrix::from_fn(n, |i, j| m[i][j]), SymMatrix::from_fn(n, |i, j| k[i][j]))
}

pub fn assemble_1d(
    space: &SplineSpace,
    density: &Density,
    geometry: &GeometryMap,
    ends: EndConditions,
) -> Result<DiscreteModel, FemError> {
    assemble(vec![space.clone()], density, geometry, vec![ends])
}

/// Full tensor-product quadrature of `M` and `K`. Kronecker factors of `M` are
/// added when both `det J` and the density separate across directions.
pub fn assemble_2d(
    spaces: [SplineSpace; 2],
    density: &Density,
    geometry: &GeometryMap,
    ends: [EndConditions; 2],
) -> Result<DiscreteModel, FemError> {
    assemble(spaces.to_vec(), density, geometry, ends.to_vec())
}

/// Unit cube with constant density.
pub fn assemble_3d_unit_cube(
    spaces: [SplineSpace; 3],
    density: f64,
    ends: [EndConditions; 3],
) -> Result<DiscreteModel, FemError> {
    assemble(spaces.to_vec(), &Density::Constant(density), &GeometryMap::UnitCube, ends.to_vec())
}

fn assemble(
    spaces: Vec<SplineSpace>,
    density: &Density,
    geometry: &GeometryMap,
    ends: Vec<EndConditions>,
) -> Result<DiscreteModel, FemError> {
    let d = spaces.len();
    if geometry.param_dim() != d {
        return Err(FemError::DimensionMismatch { expected: geometry.param_dim(), got: d });
    }
    if let GeometryMap::ControlNet(net) = geometry {
        net.validate()?;
    }
    let dims: Vec<usize> = spaces.iter().map(SplineSpace::dim).collect();
    let npts: Vec<usize> = spaces.iter().map(|s| s.degree() + 1).collect();
    if let Density::Tabulated(v) = density {
        let expected = spaces.iter().zip(&npts).map(|(s, q)| s.subdivisions() * q).product();
        if v.len() != expected {
            return Err(FemError::DimensionMismatch { expected, got: v.len() });
        }
    }
    let n: usize = dims.iter().product();
    if n > DEFAULT_DENSE_CAP {
        return Err(LinalgError::DimensionCap { dim: n, cap: DEFAULT_DENSE_CAP }.into());
    }

    let mut mass = SymMatrix::zeros(n);
    let mut stiffness = SymMatrix::zeros(n);
    let mut total_mass = 0.0;
    let mut failure = None;
    let mut basis = Vec::new();
    for_each_tensor_point(&spaces, &npts, |tp| {
        if failure.is_some() {
            return;
        }
        let mut point = [0.0; 3];
        point[..d].copy_from_slice(tp.xhat);
        let (det, jinv) = inverse_jacobian(geometry, tp.xhat);
        if !det.is_finite() || det.abs() < SINGULAR_DET {
            failure = Some(FemError::SingularGeometry { point, det });
            return;
        }
        let phys = geometry.point(tp.xhat);
        let rho = density.value(&phys, tp.index);
        if !(rho > 0.0 && rho.is_finite()) {
            failure = Some(FemError::NonPositiveDensity { point, value: rho });
            return;
        }
        let w = tp.weight * det.abs();
        total_mass += w * rho;
        tensor_basis(tp.evals, &dims, &mut basis);
        for b in basis.iter_mut() {
            let g = b.grad;
            for (r, out) in b.grad.iter_mut().enumerate().take(d) {
                *out = (0..d).map(|c| jinv[c][r] * g[c]).sum();
            }
        }
        for (a, ba) in basis.iter().enumerate() {
            for bb in &basis[a..] {
                let grad: f64 = (0..d).map(|r| ba.grad[r] * bb.grad[r]).sum();
                mass.add_to(ba.index, bb.index, w * rho * ba.value * bb.value);
                stiffness.add_to(ba.index, bb.index, w * grad);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    debug_assert!(mass.is_nonnegative());

    let free_1d: Vec<Vec<usize>> = ends.iter().zip(&dims).map(|(e, &n)| e.free_indices(n)).collect();
    let free = tensor_indices(&free_1d, &dims);
    let mass_factors = match (geometry.separable_det(), density.constant()) {
        (Some(g), Some(c)) => Some(
            spaces
                .iter()
                .zip(&g)
                .zip(&free_1d)
                .enumerate()
                .map(|(k, ((s, gk), f))| {
                    let (m, _) = assemble_1d_weighted(s, gk, &|_| 1.0);
                    let m = m.submatrix(f);
                    if k == 0 {
                        m.scaled(c)
                    } else {
                        m
                    }
                })
                .collect(),
        ),
        _ => None,
    };

    Ok(DiscreteModel {
        mass: mass.submatrix(&free),
        stiffness: stiffness.submatrix(&free),
        spaces,
        ends,
        geometry: geometry.clone(),
        density: density.clone(),
        mass_full: mass,
        stiffness_full: stiffness,
        free,
        mass_factors,
        quadrature_mass: total_mass,
    })
}

/// `det J` and `J⁻¹` with `J⁻¹[c][r] = ∂ξ_c/∂x_r`.
pub(crate) fn inverse_jacobian(geometry: &GeometryMap, xhat: &[f64]) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if xhat.len() == 2 {
        let j = geometry.jacobian2(xhat[0], xhat[1]);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        inv[0][0] = j[1][1] / det;
        inv[0][1] = -j[0][1] / det;
        inv[1][0] = -j[1][0] / det;
        inv[1][1] = j[0][0] / det;
        (det, inv)
    } else {
        for (k, row) in inv.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        (geometry.det_jacobian(xhat), inv)
    }
}

/// Row-major global indices of a tensor product of per-direction index sets.
pub(crate) fn tensor_indices(sets: &[Vec<usize>], dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (set, &n) in sets.iter().zip(dims) {
        out = out.iter().flat_map(|&base| set.iter().map(move |&i| base * n + i)).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_materialize, Factor, KronOperator};
    use crate::splinefem::End;

    fn unit_1d(p: usize, m: usize, ends: EndConditions) -> DiscreteModel {
        let s = SplineSpace::new(p, m).unwrap();
        assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, ends).unwrap()
    }

    #[test]
    fn linear_hats_dirichlet() {
        let model = unit_1d(1, 2, EndConditions::dirichlet());
        assert_eq!(model.mass().dim(), 1);
        assert!((model.mass().get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((model.stiffness().get(0, 0) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn bandwidth_and_sign() {
        let model = unit_1d(2, 20, EndConditions::natural());
        assert_eq!(model.mass().bandwidth(), 2);
        assert_eq!(model.stiffness().bandwidth(), 2);
        assert!(model.mass().is_nonnegative());
    }

    #[test]
    fn mass_sums_to_domain_measure() {
        let model = unit_1d(3, 7, EndConditions::natural());
        let s: f64 = model.mass_full().as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unit_square_is_kronecker() {
        let s = SplineSpace::new(2, 3).unwrap();
        let ends = [EndConditions::new(End::Dirichlet, End::Natural); 2];
        let model = assemble_2d([s.clone(), s], &Density::Constant(2.0), &GeometryMap::UnitSquare, ends).unwrap();
        assert!(model.is_separable());
        let f = model.mass_factors().unwrap();
        let op = KronOperator::single(f.iter().cloned().map(Factor::Dense).collect()).unwrap();
        let dense = kron_materialize(&op, 4096).unwrap();
        let diff = dense.sub(model.mass()).frobenius_norm();
        assert!(diff <= 1e-13 * model.mass().frobenius_norm());
    }

    #[test]
    fn annulus_is_kronecker() {
        let s = SplineSpace::new(3, 4).unwrap();
        let model = assemble_2d(
            [s.clone(), s],
            &Density::Constant(1.0),
            &GeometryMap::QuarterAnnulus,
            [EndConditions::dirichlet(); 2],
        )
        .unwrap();
        let f = model.mass_factors().unwrap();
        let op = KronOperator::single(f.iter().cloned().map(Factor::Dense).collect()).unwrap();
        let dense = kron_materialize(&op, 4096).unwrap();
        assert!(dense.sub(model.mass()).frobenius_norm() <= 1e-12 * model.mass().frobenius_norm());
        let area = 3.0 * core::f64::consts::PI / 4.0;
        assert!((model.total_mass() - area).abs() < 1e-12);
    }

    #[test]
    fn variable_density_is_not_separable() {
        let s = SplineSpace::new(2, 3).unwrap();
        let model =
            assemble_2d([s.clone(), s], &Density::SinProduct, &GeometryMap::UnitSquare, [EndConditions::natural(); 2])
                .unwrap();
        assert!(!model.is_separable());
    }

    #[test]
    fn non_positive_density_rejected() {
        let s = SplineSpace::new(1, 2).unwrap();
        let r = assemble_1d(&s, &Density::Constant(0.0), &GeometryMap::UnitInterval, EndConditions::natural());
        assert!(matches!(r, Err(FemError::NonPositiveDensity { .. })));
        let r = assemble_1d(&s, &Density::Tabulated(vec![1.0; 3]), &GeometryMap::UnitInterval, EndConditions::natural());
        assert!(matches!(r, Err(FemError::DimensionMismatch { expected: 4, got: 3 })));
    }

    #[test]
    fn cube_matches_triple_product() {
        let s = SplineSpace::new(1, 2).unwrap();
        let model = assemble_3d_unit_cube([s.clone(), s.clone(), s], 1.0, [EndConditions::natural(); 3]).unwrap();
        assert_eq!(model.mass().dim(), 27);
        assert!((model.total_mass() - 1.0).abs() < 1e-14);
        let f = model.mass_factors().unwrap();
        let op = KronOperator::single(f.iter().cloned().map(Factor::Dense).collect()).unwrap();
        let dense = kron_materialize(&op, 4096).unwrap();
        assert!(dense.sub(model.mass()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn tensor_index_product() {
        assert_eq!(tensor_indices(&[vec![1, 2], vec![0, 2]], &[4, 3]), [3, 5, 6, 8]);
    }
}
