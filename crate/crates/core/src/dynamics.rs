//! Newmark time integration of `M ü + K u = f` with a substitutable mass operator.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, norm_inf, Cholesky, LinalgError, MassOperator, MassSolver, SymMatrix, DEFAULT_DENSE_CAP};
use crate::math;
use crate::pencil::{critical_dt, PencilError};
use crate::splinefem::{l2_error, DiscreteModel, FemError};

/// Blow-up threshold relative to `‖u₀‖∞ + Δt ‖v₀‖∞ + 1`.
pub const UNSTABLE_GROWTH: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    InvalidConfig(&'static str),
    DimensionMismatch { expected: usize, got: usize },
    Unstable { step: usize },
    Linalg(LinalgError),
    Pencil(PencilError),
    Fem(FemError),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::InvalidConfig(why) => write!(f, "invalid Newmark configuration: {why}"),
            DynamicsError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            DynamicsError::Unstable { step } => write!(f, "solution blew up at step {step}"),
            DynamicsError::Linalg(e) => write!(f, "{e}"),
            DynamicsError::Pencil(e) => write!(f, "{e}"),
            DynamicsError::Fem(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<LinalgError> for DynamicsError {
    fn from(e: LinalgError) -> Self {
        DynamicsError::Linalg(e)
    }
}

impl From<PencilError> for DynamicsError {
    fn from(e: PencilError) -> Self {
        DynamicsError::Pencil(e)
    }
}

impl From<FemError> for DynamicsError {
    fn from(e: FemError) -> Self {
        DynamicsError::Fem(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewmarkConfig {
    pub beta: f64,
    pub gamma: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
}

impl NewmarkConfig {
    /// `Δt = T / N`
    pub fn new(beta: f64, gamma: f64, t_final: f64, steps: usize) -> Result<Self, DynamicsError> {
        if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&gamma) {
            return Err(DynamicsError::InvalidConfig("beta and gamma must lie in [0, 1]"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(DynamicsError::InvalidConfig("final time must be positive"));
        }
        if steps == 0 {
            return Err(DynamicsError::InvalidConfig("at least one step is required"));
        }
        Ok(NewmarkConfig { beta, gamma, dt: t_final / steps as f64, steps, t_final })
    }

    /// Smallest `N` with `T / N ≤ dt_max`. Ratios within `1e-12` of an integer round to it.
    pub fn with_max_step(beta: f64, gamma: f64, t_final: f64, dt_max: f64) -> Result<Self, DynamicsError> {
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(DynamicsError::InvalidConfig("time step must be positive"));
        }
        let steps = math::ceil(t_final / dt_max * (1.0 - 1e-12)).max(1.0) as usize;
        Self::new(beta, gamma, t_final, steps)
    }

    pub fn central_difference(t_final: f64, steps: usize) -> Result<Self, DynamicsError> {
        Self::new(0.0, 0.5, t_final, steps)
    }

    pub fn is_explicit(&self) -> bool {
        self.beta == 0.0
    }

    /// `β ≥ γ/2 ≥ 1/4`
    pub fn is_unconditionally_stable(&self) -> bool {
        self.beta >= self.gamma / 2.0 && self.gamma / 2.0 >= 0.25
    }

    pub fn time(&self, s: usize) -> f64 {
        s as f64 * self.dt
    }
}

/// States `u_s, v_s, a_s` at `t_s = s Δt`, `s = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: NewmarkConfig,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.u[0].len()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|s| self.config.time(s)).collect()
    }

    /// Step closest to `t`, clamped to the trajectory.
    pub fn nearest_step(&self, t: f64) -> usize {
        let s = math::round(t / self.config.dt);
        (s.max(0.0) as usize).min(self.len() - 1)
    }
}

enum StepSolver {
    Explicit(MassSolver),
    Implicit(Cholesky),
}

impl StepSolver {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            StepSolver::Explicit(s) => s.solve(rhs),
            StepSolver::Implicit(c) => c.solve(rhs),
        }
    }
}

/// Newmark's method with `M` replaced by `m` in the initial and per-step solves.
pub fn newmark(
    m: &MassOperator,
    k: &SymMatrix,
    f: &dyn Fn(f64) -> Vec<f64>,
    u0: &[f64],
    v0: &[f64],
    cfg: &NewmarkConfig,
) -> Result<Trajectory, DynamicsError> {
    let n = k.dim();
    for got in [m.dim(), u0.len(), v0.len()] {
        if got != n {
            return Err(DynamicsError::DimensionMismatch { expected: n, got });
        }
    }
    let (beta, gamma, dt) = (cfg.beta, cfg.gamma, cfg.dt);
    let check_force = |t: f64| -> Result<Vec<f64>, DynamicsError> {
        let v = f(t);
        if v.len() != n {
            return Err(DynamicsError::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(v)
    };

    let initial = m.factorize()?;
    let step_solver = if cfg.is_explicit() {
        StepSolver::Explicit(initial.clone())
    } else {
        let dense = m.to_sym(DEFAULT_DENSE_CAP)?;
        StepSolver::Implicit(cholesky(&dense.add_scaled(beta * dt * dt, k))?)
    };

    let ku0 = k.matvec(u0);
    let f0 = check_force(0.0)?;
    let rhs0: Vec<f64> = f0.iter().zip(&ku0).map(|(a, b)| a - b).collect();
    let a0 = initial.solve(&rhs0);

    let limit = UNSTABLE_GROWTH * (norm_inf(u0) + dt * norm_inf(v0) + 1.0);
    let mut traj = Trajectory {
        config: *cfg,
        u: Vec::with_capacity(cfg.steps + 1),
        v: Vec::with_capacity(cfg.steps + 1),
        a: Vec::with_capacity(cfg.steps + 1),
    };
    traj.u.push(u0.to_vec());
    traj.v.push(v0.to_vec());
    traj.a.push(a0);

    let mut ut = vec![0.0; n];
    let mut vt = vec![0.0; n];
    for s in 0..cfg.steps {
        let (us, vs, as_) = (&traj.u[s], &traj.v[s], &traj.a[s]);
        for i in 0..n {
            ut[i] = us[i] + dt * vs[i] + (0.5 - beta) * dt * dt * as_[i];
            vt[i] = vs[i] + (1.0 - gamma) * dt * as_[i];
        }
        let fs = check_force(cfg.time(s + 1))?;
        let kut = k.matvec(&ut);
        let rhs: Vec<f64> = fs.iter().zip(&kut).map(|(a, b)| a - b).collect();
        let a1 = step_solver.solve(&rhs);
        let v1: Vec<f64> = vt.iter().zip(&a1).map(|(v, a)| v + gamma * dt * a).collect();
        let u1: Vec<f64> = ut.iter().zip(&a1).map(|(u, a)| u + beta * dt * dt * a).collect();
        let finite = u1.iter().chain(&v1).chain(&a1).all(|x| x.is_finite());
        if !finite || norm_inf(&u1) > limit {
            return Err(DynamicsError::Unstable { step: s + 1 });
        }
        traj.u.push(u1);
        traj.v.push(v1);
        traj.a.push(a1);
    }
    Ok(traj)
}

/// `β = 0`, `γ = 1/2` with `Δt = T / N` and `N = ⌈T / (safety · Δt_c)⌉`.
pub fn central_difference(
    m: &MassOperator,
    k: &SymMatrix,
    f: &dyn Fn(f64) -> Vec<f64>,
    u0: &[f64],
    v0: &[f64],
    t_final: f64,
    safety: f64,
) -> Result<Trajectory, DynamicsError> {
    let cfg = central_difference_config(m, k, t_final, safety)?;
    newmark(m, k, f, u0, v0, &cfg)
}

/// The configuration [`central_difference`] would use.
pub fn central_difference_config(
    m: &MassOperator,
    k: &SymMatrix,
    t_final: f64,
    safety: f64,
) -> Result<NewmarkConfig, DynamicsError> {
    if !(safety > 0.0) {
        return Err(DynamicsError::InvalidConfig("safety factor must be positive"));
    }
    let dt_c = critical_dt(k, m)?;
    NewmarkConfig::with_max_step(0.0, 0.5, t_final, safety * dt_c)
}

/// One sample of [`transient_l2_series`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub requested: f64,
    pub time: f64,
    pub error: f64,
}

/// `‖u_h(t) − u(t)‖_{L²}` at the steps nearest to each sample time.
pub fn transient_l2_series(
    model: &DiscreteModel,
    traj: &Trajectory,
    exact: &dyn Fn(&[f64], f64) -> f64,
    times: &[f64],
) -> Result<Vec<ErrorSample>, DynamicsError> {
    if traj.dim() != model.n_free() {
        return Err(DynamicsError::DimensionMismatch { expected: model.n_free(), got: traj.dim() });
    }
    times
        .iter()
        .map(|&t| {
            let s = traj.nearest_step(t);
            let ts = traj.config.time(s);
            let error = l2_error(model, &traj.u[s], &|x| exact(x, ts))?;
            Ok(ErrorSample { requested: t, time: ts, error })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(m: f64) -> MassOperator {
        MassOperator::Dense(SymMatrix::from_diag(&[m]))
    }

    fn zero(_: f64) -> Vec<f64> {
        vec![0.0]
    }

    #[test]
    fn config_flags() {
        let c = NewmarkConfig::new(0.25, 0.5, 1.0, 10).unwrap();
        assert!(c.is_unconditionally_stable() && !c.is_explicit());
        let e = NewmarkConfig::central_difference(1.0, 10).unwrap();
        assert!(e.is_explicit() && !e.is_unconditionally_stable());
        assert!((e.dt * e.steps as f64 - e.t_final).abs() < 1e-15);
        assert!(NewmarkConfig::new(1.5, 0.5, 1.0, 10).is_err());
        assert!(NewmarkConfig::new(0.0, 0.5, 1.0, 0).is_err());
    }

    #[test]
    fn free_motion() {
        let k = SymMatrix::zeros(1);
        let cfg = NewmarkConfig::central_difference(1.0, 8).unwrap();
        let t = newmark(&scalar(1.0), &k, &zero, &[0.0], &[1.0], &cfg).unwrap();
        for (s, u) in t.u.iter().enumerate() {
            assert_eq!(u[0], s as f64 * cfg.dt);
        }
    }

    #[test]
    fn k_equals_m_gives_single_step() {
        let m = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let cfg = central_difference_config(&MassOperator::Dense(m.clone()), &m, 2.0, 1.0).unwrap();
        assert_eq!(cfg.steps, 1);
        assert!((cfg.dt - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_stability_boundary() {
        let omega = 3.0;
        let k = SymMatrix::from_diag(&[omega * omega]);
        let dt_c = 2.0 / omega;
        let stable = NewmarkConfig::central_difference(0.999 * dt_c * 10_000.0, 10_000).unwrap();
        let t = newmark(&scalar(1.0), &k, &zero, &[1.0], &[0.0], &stable).unwrap();
        assert!(t.u.iter().all(|u| u[0].abs() < 50.0));
        let unstable = NewmarkConfig::central_difference(1.05 * dt_c * 200.0, 200).unwrap();
        let r = newmark(&scalar(1.0), &k, &zero, &[1.0], &[0.0], &unstable);
        assert!(matches!(r, Err(DynamicsError::Unstable { .. })));
    }

    #[test]
    fn average_acceleration_is_stable_beyond_critical_step() {
        let k = SymMatrix::from_diag(&[100.0]);
        let cfg = NewmarkConfig::new(0.25, 0.5, 100.0, 100).unwrap();
        let t = newmark(&scalar(1.0), &k, &zero, &[1.0], &[0.0], &cfg).unwrap();
        assert!(t.u.iter().all(|u| u[0].abs() <= 1.0 + 1e-12));
    }
}
