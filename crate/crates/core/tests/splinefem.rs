mod common;

use std::f64::consts::PI;

use common::loglog_slope;
use lumplab_core::linalg::{cholesky, kron_materialize};
use lumplab_core::precision::{refined_frequency_1d, MassKind};
use lumplab_core::splinefem::{
    assemble_1d, assemble_2d, assemble_3d_unit_cube, exact_eigenfrequency, l2_error, Density, End, EndConditions,
    GeometryMap, SplineSpace,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_of_unity(p in 1usize..7, m in 1usize..30, x in 0.0f64..=1.0) {
        let s = SplineSpace::new(p, m).unwrap();
        let e = s.eval(x).unwrap();
        prop_assert_eq!(e.values.len(), p + 1);
        prop_assert!(e.values.iter().all(|v| *v >= 0.0));
        prop_assert!((e.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(e.derivatives.iter().sum::<f64>().abs() < 1e-9 * m as f64);
    }

    #[test]
    fn assembled_mass_is_nonnegative_and_banded(p in 1usize..6, m in 1usize..25) {
        let s = SplineSpace::new(p, m).unwrap();
        let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::natural()).unwrap();
        prop_assert!(model.mass().is_nonnegative());
        prop_assert!(model.mass().bandwidth() <= p);
        prop_assert!(model.stiffness().bandwidth() <= p);
        let total: f64 = model.mass().as_slice().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn outside_domain_is_rejected() {
    assert!(SplineSpace::new(2, 4).unwrap().eval(1.5).is_err());
}

#[test]
fn linear_hats_two_elements() {
    let s = SplineSpace::new(1, 2).unwrap();
    let e = s.eval(0.25).unwrap();
    assert_eq!(e.first, 0);
    assert!((e.values[0] - 0.5).abs() < 1e-15 && (e.values[1] - 0.5).abs() < 1e-15);
    let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::dirichlet()).unwrap();
    assert!((model.mass().get(0, 0) - 1.0 / 3.0).abs() < 1e-14);
    assert!((model.stiffness().get(0, 0) - 4.0).abs() < 1e-12);
}

#[test]
fn quadratic_bandwidth() {
    let s = SplineSpace::new(2, 20).unwrap();
    let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::dirichlet()).unwrap();
    assert_eq!(model.mass().bandwidth(), 2);
    assert!(cholesky(model.mass()).is_ok() && cholesky(model.stiffness()).is_ok());
}

#[test]
fn separable_paths_match_full_assembly() {
    let s = SplineSpace::new(2, 4).unwrap();
    for geo in [GeometryMap::UnitSquare, GeometryMap::QuarterAnnulus] {
        let model =
            assemble_2d([s.clone(), s.clone()], &Density::Constant(2.0), &geo, [EndConditions::dirichlet(); 2]).unwrap();
        assert!(model.is_separable());
        let kron = kron_materialize(&model.mass_kron().unwrap(), 4096).unwrap();
        assert!(kron.sub(model.mass()).frobenius_norm() <= 1e-10 * model.mass().frobenius_norm());
    }
    let cube = assemble_3d_unit_cube([s.clone(), s.clone(), s.clone()], 1.0, [EndConditions::natural(); 3]).unwrap();
    let kron = kron_materialize(&cube.mass_kron().unwrap(), 4096).unwrap();
    assert!(kron.sub(cube.mass()).frobenius_norm() <= 1e-10 * cube.mass().frobenius_norm());
}

#[test]
fn appendix_density_is_not_separable() {
    let s = SplineSpace::new(2, 4).unwrap();
    let model = assemble_2d([s.clone(), s], &Density::SinProduct, &GeometryMap::UnitSquare, [EndConditions::natural(); 2])
        .unwrap();
    assert!(!model.is_separable());
    let total: f64 = model.mass_full().as_slice().iter().sum();
    assert!((total - model.total_mass()).abs() < 1e-10 * total);
}

#[test]
fn annulus_mass_conservation() {
    let s = SplineSpace::new(3, 6).unwrap();
    let model =
        assemble_2d([s.clone(), s], &Density::Constant(1.0), &GeometryMap::QuarterAnnulus, [EndConditions::natural(); 2])
            .unwrap();
    let total: f64 = model.mass_full().as_slice().iter().sum();
    assert!((total - 0.75 * PI).abs() < 1e-10 * total);
}

#[test]
fn exact_frequencies() {
    assert_eq!(exact_eigenfrequency("laplace_1d_mixed").unwrap(), PI / 2.0);
    assert!((exact_eigenfrequency("laplace_2d_mixed").unwrap() - PI / 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(exact_eigenfrequency("laplace_1d_dirichlet").unwrap(), PI);
    assert!(exact_eigenfrequency("helmholtz").is_err());
}

#[test]
fn l2_error_of_zero_coefficients() {
    let s = SplineSpace::new(3, 10).unwrap();
    let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::dirichlet()).unwrap();
    let e = l2_error(&model, &vec![0.0; model.n_free()], &|x| (4.0 * PI * x[0]).sin()).unwrap();
    assert!((e - 0.5f64.sqrt()).abs() < 1e-6);
    assert!(l2_error(&model, &[0.0], &|_| 0.0).is_err());
}

#[test]
fn constants_are_reproduced() {
    let s = SplineSpace::new(2, 5).unwrap();
    let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::natural()).unwrap();
    let c = model.project(&|_| 3.0).unwrap();
    assert!(l2_error(&model, &c, &|_| 3.0).unwrap() < 1e-12);
}

#[test]
fn projection_converges_at_order_p_plus_one() {
    for p in [1usize, 2, 3] {
        let meshes = [4usize, 8, 16, 32];
        let errs: Vec<f64> = meshes
            .iter()
            .map(|&m| {
                let s = SplineSpace::new(p, m).unwrap();
                let model =
                    assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::natural()).unwrap();
                let u = |x: &[f64]| (3.0 * x[0]).exp() * (2.0 * x[0]).sin();
                l2_error(&model, &model.project(&u).unwrap(), &u).unwrap()
            })
            .collect();
        let h: Vec<f64> = meshes.iter().map(|&m| 1.0 / m as f64).collect();
        let slope = loglog_slope(&h, &errs);
        assert!((slope - (p + 1) as f64).abs() < 0.3, "p={p} slope {slope}");
    }
}

#[test]
fn consistent_mass_frequency_converges_at_order_2p() {
    let omega = exact_eigenfrequency("laplace_1d_mixed").unwrap();
    let ends = EndConditions::new(End::Dirichlet, End::Natural);
    for p in [2usize, 3] {
        let meshes = [8usize, 16, 32, 64];
        let errs: Vec<f64> = meshes
            .iter()
            .map(|&m| {
                let s = SplineSpace::new(p, m).unwrap();
                let w = refined_frequency_1d(&s, ends, MassKind::Consistent, 0).unwrap();
                (w - omega).abs() / omega
            })
            .collect();
        let h: Vec<f64> = meshes.iter().map(|&m| 1.0 / m as f64).collect();
        let slope = loglog_slope(&h, &errs);
        assert!((slope - 2.0 * p as f64).abs() < 0.4, "p={p} slope {slope} errs {errs:?}");
    }
}
