mod common;

use std::f64::consts::PI;

use common::loglog_slope;
use lumplab_core::dynamics::{
    central_difference, central_difference_config, newmark, transient_l2_series, DynamicsError, NewmarkConfig,
};
use lumplab_core::linalg::{MassOperator, SymMatrix};
use lumplab_core::pencil::critical_dt;
use lumplab_core::splinefem::{assemble_1d, string_solution, Density, EndConditions, GeometryMap, SplineSpace};

fn oscillator(omega: f64) -> (MassOperator, SymMatrix) {
    (MassOperator::Dense(SymMatrix::identity(1)), SymMatrix::from_diag(&[omega * omega]))
}

fn zero1(_: f64) -> Vec<f64> {
    vec![0.0]
}

#[test]
fn bounded_below_critical_step() {
    let omega = 5.0;
    let (m, k) = oscillator(omega);
    let dt = 0.9 * 2.0 / omega;
    let cfg = NewmarkConfig::central_difference(dt * 1e4, 10_000).unwrap();
    let t = newmark(&m, &k, &zero1, &[1.0], &[0.0], &cfg).unwrap();
    // u_s = cos(sθ) with cos θ = 1 − (ωΔt)²/2
    let theta = (1.0 - (omega * cfg.dt).powi(2) / 2.0).acos();
    for (s, u) in t.u.iter().enumerate().step_by(997) {
        assert!((u[0] - (s as f64 * theta).cos()).abs() < 1e-8);
    }
    assert!(t.u.iter().all(|u| u[0].abs() <= 1.01));
}

#[test]
fn unstable_above_critical_step() {
    let omega = 5.0;
    let (m, k) = oscillator(omega);
    let cfg = NewmarkConfig::central_difference(1.1 * 2.0 / omega * 200.0, 200).unwrap();
    match newmark(&m, &k, &zero1, &[1.0], &[0.0], &cfg) {
        Err(DynamicsError::Unstable { step }) => assert!(step <= 200),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn stability_boundary_is_sharp() {
    let omega = 2.0;
    let (m, k) = oscillator(omega);
    let dt_c = critical_dt(&k, &m).unwrap();
    assert!((dt_c - 1.0).abs() < 1e-14);
    let n = 100_000;
    let below = NewmarkConfig::central_difference(0.999 * dt_c * n as f64, n).unwrap();
    let t = newmark(&m, &k, &zero1, &[1.0], &[0.0], &below).unwrap();
    assert!(t.u.iter().all(|u| u[0].abs() <= 1.0 + 1e-9));
    let above = NewmarkConfig::central_difference(1.001 * dt_c * n as f64, n).unwrap();
    assert!(matches!(newmark(&m, &k, &zero1, &[1.0], &[0.0], &above), Err(DynamicsError::Unstable { .. })));
}

#[test]
fn central_difference_is_second_order() {
    let omega = 1.0;
    let (m, k) = oscillator(omega);
    let t_final = 10.0;
    let steps = [100usize, 200, 400, 800, 1600];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let cfg = NewmarkConfig::central_difference(t_final, n).unwrap();
            let t = newmark(&m, &k, &zero1, &[1.0], &[0.0], &cfg).unwrap();
            (t.u[n][0] - (omega * t_final).cos()).abs()
        })
        .collect();
    let dts: Vec<f64> = steps.iter().map(|&n| t_final / n as f64).collect();
    let slope = loglog_slope(&dts, &errs);
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn step_count_hits_final_time() {
    let (m, k) = oscillator(3.0);
    let cfg = central_difference_config(&m, &k, 7.3, 0.85).unwrap();
    assert!((cfg.dt * cfg.steps as f64 - 7.3).abs() < 1e-12 * 7.3);
    assert!(cfg.dt <= 0.85 * 2.0 / 3.0);
    let t = central_difference(&m, &k, &zero1, &[1.0], &[0.0], 7.3, 0.85).unwrap();
    assert_eq!(t.len(), cfg.steps + 1);
}

#[test]
fn forcing_enters_at_new_time() {
    // u'' = t with u(0) = u'(0) = 0
    let m = MassOperator::Dense(SymMatrix::identity(1));
    let k = SymMatrix::zeros(1);
    let cfg = NewmarkConfig::central_difference(1.0, 1000).unwrap();
    let t = newmark(&m, &k, &|t| vec![t], &[0.0], &[0.0], &cfg).unwrap();
    assert!((t.u[1000][0] - 1.0 / 6.0).abs() < 1e-6);
    assert!((t.v[1000][0] - 0.5).abs() < 1e-9);
}

fn string_model() -> lumplab_core::splinefem::DiscreteModel {
    let s = SplineSpace::new(4, 50).unwrap();
    assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::dirichlet()).unwrap()
}

#[test]
fn string_consistent_mass_is_accurate() {
    let model = string_model();
    let u0 = model.project(&|x| string_solution(x[0], 0.0)).unwrap();
    let v0 = vec![0.0; model.n_free()];
    let zero = |_: f64| vec![0.0; model.n_free()];
    let t = central_difference(&model.mass_operator(), model.stiffness(), &zero, &u0, &v0, 1.0, 0.85).unwrap();
    let series = transient_l2_series(&model, &t, &|x, t| string_solution(x[0], t), &[0.5, 1.0]).unwrap();
    assert!((series[1].time - 1.0).abs() < 1e-12);
    assert!(series[1].error < 5e-3, "{series:?}");
}

#[test]
fn series_of_discrete_solution_vanishes() {
    let s = SplineSpace::new(2, 6).unwrap();
    let model = assemble_1d(&s, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::natural()).unwrap();
    let n = model.n_free();
    // K = 0 with v0 = 0 keeps u constant in time
    let u0: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let cfg = NewmarkConfig::central_difference(1.0, 4).unwrap();
    let t = newmark(&model.mass_operator(), &SymMatrix::zeros(n), &|_| vec![0.0; n], &u0, &vec![0.0; n], &cfg).unwrap();
    let full = model.expand(&u0).unwrap();
    let uh = |x: &[f64], _: f64| {
        let e = s.eval(x[0]).unwrap();
        e.values.iter().enumerate().map(|(k, b)| b * full[e.first + k]).sum::<f64>()
    };
    for e in transient_l2_series(&model, &t, &uh, &[0.0, 0.3, 1.0]).unwrap() {
        assert!(e.error < 1e-13);
    }
}

#[test]
fn implicit_average_acceleration_is_stable_past_critical_step() {
    let model = string_model();
    let m = model.mass_operator();
    let dt_c = critical_dt(model.stiffness(), &m).unwrap();
    let u0 = model.project(&|x| (PI * x[0]).sin()).unwrap();
    let v0 = vec![0.0; model.n_free()];
    let n = 50;
    let cfg = NewmarkConfig::new(0.25, 0.5, 20.0 * dt_c * n as f64, n).unwrap();
    let zero = |_: f64| vec![0.0; model.n_free()];
    let t = newmark(&m, model.stiffness(), &zero, &u0, &v0, &cfg).unwrap();
    let bound = u0.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(t.u.iter().all(|u| u.iter().all(|x| x.abs() <= 2.0 * bound)));
}
