//! Experiment runners. Each returns its output files in memory.

use std::f64::consts::PI;

use lumplab_core::dynamics::{
    central_difference_config, newmark, transient_l2_series, ErrorSample, NewmarkConfig, Trajectory,
};
use lumplab_core::linalg::{kron_materialize, MassOperator, SymMatrix, DEFAULT_DENSE_CAP};
use lumplab_core::lumping::{make_pi, make_pij};
use lumplab_core::nkp::{
    cond_bound, hoffman_wielandt_check, nkp_rank1, nkp_rank1_3d, nkp_rank_r, spectral_equivalence_scan, CondBound,
    NkpResult, ScanRow,
};
use lumplab_core::pencil::{gen_eigvals, gen_eigvals_op};
use lumplab_core::precision::{refined_frequency_1d, MassKind};
use lumplab_core::splinefem::{
    annulus_forcing, annulus_solution, annulus_velocity0, assemble_1d, assemble_2d, assemble_3d_unit_cube,
    string_solution, Density, DiscreteModel, GeometryMap, SplineSpace,
};
use serde::Serialize;

use crate::catalogue;
use crate::config::{DynamicsProblem, ExperimentConfig, OperatorSpec};
use crate::error::{numerical, Error, Result};
use crate::io::{csv_bytes, fmt_f64, matrix_market, trajectory_bytes, Artifact};

/// Relative slack for eigenvalue orderings.
pub const ORDER_TOL: f64 = 1e-10;

pub fn build_model(cfg: &ExperimentConfig) -> Result<DiscreteModel> {
    let d = &cfg.discretization;
    let geometry = catalogue::geometry(&d.geometry)?;
    let space = SplineSpace::new(d.degree, d.subdivisions).map_err(|e| Error::config(e.to_string()))?;
    let ends = cfg.ends();
    let ctx = || format!("{}: assembly", cfg.id);
    match cfg.param_dim() {
        1 => assemble_1d(&space, &d.density, &geometry, ends[0]).map_err(numerical(ctx())),
        2 => assemble_2d([space.clone(), space], &d.density, &geometry, [ends[0], ends[1]]).map_err(numerical(ctx())),
        _ => {
            let Density::Constant(rho) = d.density else {
                return Err(Error::config("the unit cube only takes a constant density"));
            };
            assemble_3d_unit_cube([space.clone(), space.clone(), space], rho, [ends[0], ends[1], ends[2]])
                .map_err(numerical(ctx()))
        }
    }
}

fn rank1(model: &DiscreteModel) -> std::result::Result<NkpResult, lumplab_core::nkp::NkpError> {
    let d = model.free_dims();
    match d.len() {
        3 => nkp_rank1_3d(model.mass(), [d[0], d[1], d[2]]),
        _ => nkp_rank1(model.mass(), d[0], d[1]),
    }
}

pub fn build_operator(model: &DiscreteModel, op: &OperatorSpec) -> Result<MassOperator> {
    let ctx = || format!("operator {op}");
    Ok(match op {
        OperatorSpec::Consistent => model.mass_operator(),
        OperatorSpec::Banded { i } => {
            let n = model.n_free();
            MassOperator::Banded(make_pi(model.mass(), (*i).min(n)).map_err(numerical(ctx()))?.p)
        }
        OperatorSpec::Kron { indices } => {
            let f = model
                .mass_factors()
                .ok_or_else(|| Error::config(format!("{op} needs a separable mass matrix")))?;
            MassOperator::Kron(make_pij(f, indices).map_err(numerical(ctx()))?)
        }
        OperatorSpec::Nkp { rank: 1 } => MassOperator::Kron(rank1(model).map_err(numerical(ctx()))?.kron()),
        OperatorSpec::Nkp { rank } => {
            let d = model.free_dims();
            MassOperator::Kron(nkp_rank_r(model.mass(), d[0], d[1], *rank).map_err(numerical(ctx()))?)
        }
        OperatorSpec::TwoLevel { i } => MassOperator::Kron(rank1(model).and_then(|r| r.lumped(*i)).map_err(numerical(ctx()))?),
    })
}

/// `λ_k(K, M̃)` ascending for every configured operator.
pub fn spectra(cfg: &ExperimentConfig, model: &DiscreteModel) -> Result<Vec<(String, Vec<f64>)>> {
    cfg.operators
        .iter()
        .map(|op| {
            let m = build_operator(model, op)?;
            let vals = gen_eigvals_op(model.stiffness(), &m).map_err(numerical(format!("{}: spectrum of {op}", cfg.id)))?;
            Ok((op.label(), vals))
        })
        .collect()
}

/// Largest violation of `a_k ≤ b_k (1 + tol)`, zero when the ordering holds.
pub fn ordering_violation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y.abs().max(f64::MIN_POSITIVE)).max(0.0)).fold(0.0, f64::max)
}

fn file(cfg: &ExperimentConfig, default_suffix: &str, custom: Option<&String>) -> String {
    custom.cloned().unwrap_or_else(|| format!("{}_{default_suffix}", cfg.id))
}

fn summary_name(cfg: &ExperimentConfig) -> String {
    file(cfg, "summary.json", cfg.outputs.summary.as_ref())
}

fn require_operators(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.operators.is_empty() {
        return Err(Error::config(format!("{}: no operators configured", cfg.id)));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Envelope {
    lower: f64,
    upper: f64,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct OperatorSpectrum {
    label: String,
    lambda_min: f64,
    lambda_max: f64,
    critical_dt: f64,
    /// `λ_1(M, M̃) ≤ λ_k(K, M̃)/λ_k(K, M) ≤ λ_n(M, M̃)`
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_envelope: Option<Envelope>,
}

#[derive(Debug, Serialize)]
struct Dominance {
    lower: String,
    upper: String,
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    id: String,
    config_hash: String,
    n: usize,
    operators: Vec<OperatorSpectrum>,
    /// Pairs with `λ_k(K, lower) ≤ λ_k(K, upper)` for every `k`.
    dominance: Vec<Dominance>,
}

pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    require_operators(cfg)?;
    let model = build_model(cfg)?;
    let specs = spectra(cfg, &model)?;
    let hash = cfg.hash();
    let n = model.n_free();

    let mut operators = Vec::new();
    let km = gen_eigvals(model.stiffness(), model.mass()).map_err(numerical(format!("{}: (K, M)", cfg.id)))?;
    for (op, (label, vals)) in cfg.operators.iter().zip(&specs) {
        let ratio_envelope = match op {
            OperatorSpec::Consistent => None,
            _ => {
                let mt = build_operator(&model, op)?.to_sym(DEFAULT_DENSE_CAP).map_err(numerical(label.clone()))?;
                let mmt = gen_eigvals(model.mass(), &mt).map_err(numerical(format!("{}: (M, {label})", cfg.id)))?;
                let (lower, upper) = (mmt[0], mmt[n - 1]);
                let slack = 1e-9;
                let holds = vals.iter().zip(&km).all(|(a, b)| {
                    let r = a / b;
                    r >= lower * (1.0 - slack) && r <= upper * (1.0 + slack)
                });
                Some(Envelope { lower, upper, holds })
            }
        };
        operators.push(OperatorSpectrum {
            label: label.clone(),
            lambda_min: vals[0],
            lambda_max: vals[n - 1],
            critical_dt: 2.0 / vals[n - 1].sqrt(),
            ratio_envelope,
        });
    }
    let mut dominance = Vec::new();
    for (la, a) in &specs {
        for (lb, b) in &specs {
            if la != lb && ordering_violation(a, b) <= ORDER_TOL {
                dominance.push(Dominance { lower: la.clone(), upper: lb.clone() });
            }
        }
    }

    let mut columns = vec!["k".to_string()];
    columns.extend(specs.iter().map(|(l, _)| l.clone()));
    let rows: Vec<Vec<String>> = (0..n)
        .map(|k| {
            let mut r = vec![(k + 1).to_string()];
            r.extend(specs.iter().map(|(_, v)| fmt_f64(v[k])));
            r
        })
        .collect();
    let summary = SpectrumSummary { id: cfg.id.clone(), config_hash: hash.clone(), n, operators, dominance };
    Ok(vec![
        Artifact::new(file(cfg, "spectrum.csv", cfg.outputs.csv.as_ref()), csv_bytes(&cfg.id, &hash, &columns, &rows)),
        Artifact::json(summary_name(cfg), &summary),
    ])
}

/// Least-squares slope of `log y` against `log x`, skipping nonpositive samples.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &b)| b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSeries {
    pub label: String,
    /// `|ω₁ − ω_{h,1}| / ω₁` per mesh.
    pub errors: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Serialize)]
struct ConvergenceSummary {
    id: String,
    config_hash: String,
    problem: String,
    omega: f64,
    meshes: Vec<usize>,
    series: Vec<ConvergenceSeries>,
}

/// Lowest-frequency errors per operator and mesh.
pub fn convergence_series(cfg: &ExperimentConfig) -> Result<(Vec<usize>, Vec<ConvergenceSeries>)> {
    require_operators(cfg)?;
    let conv = cfg.convergence.as_ref().ok_or_else(|| Error::config(format!("{}: missing `convergence`", cfg.id)))?;
    let omega = conv.problem.lowest_frequency();
    let d = &cfg.discretization;
    let refined = cfg.param_dim() == 1 && d.geometry == "unit_interval" && d.density == Density::Constant(1.0);
    let hs: Vec<f64> = conv.meshes.iter().map(|&m| 1.0 / m as f64).collect();
    let mut series: Vec<ConvergenceSeries> =
        cfg.operators.iter().map(|op| ConvergenceSeries { label: op.label(), errors: Vec::new(), slope: f64::NAN }).collect();
    for &m in &conv.meshes {
        let mut c = cfg.clone();
        c.discretization.subdivisions = m;
        let kinds: Vec<Option<MassKind>> = cfg
            .operators
            .iter()
            .map(|op| match op {
                OperatorSpec::Consistent if refined => Some(MassKind::Consistent),
                OperatorSpec::Banded { i } if refined => Some(MassKind::Banded(*i)),
                _ => None,
            })
            .collect();
        let model = if kinds.iter().all(Option::is_some) { None } else { Some(build_model(&c)?) };
        for ((op, kind), s) in cfg.operators.iter().zip(kinds).zip(&mut series) {
            let ctx = || format!("{}: m={m}, {op}", cfg.id);
            let w = match (kind, &model) {
                (Some(kind), _) => {
                    let space = SplineSpace::new(d.degree, m).map_err(|e| Error::config(e.to_string()))?;
                    refined_frequency_1d(&space, cfg.ends()[0], kind, 0).map_err(numerical(ctx()))?
                }
                (None, Some(model)) => {
                    let mt = build_operator(model, op)?;
                    gen_eigvals_op(model.stiffness(), &mt).map_err(numerical(ctx()))?[0].sqrt()
                }
                (None, None) => unreachable!("model is built whenever an operator needs it"),
            };
            s.errors.push((omega - w).abs() / omega);
        }
    }
    for s in &mut series {
        s.slope = loglog_slope(&hs, &s.errors);
    }
    Ok((conv.meshes.clone(), series))
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (meshes, series) = convergence_series(cfg)?;
    let conv = cfg.convergence.as_ref().expect("checked by convergence_series");
    let hash = cfg.hash();
    let mut columns = vec!["m".to_string(), "h".to_string()];
    columns.extend(series.iter().map(|s| s.label.clone()));
    let rows: Vec<Vec<String>> = meshes
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let mut r = vec![m.to_string(), fmt_f64(1.0 / m as f64)];
            r.extend(series.iter().map(|s| fmt_f64(s.errors[j])));
            r
        })
        .collect();
    let summary = ConvergenceSummary {
        id: cfg.id.clone(),
        config_hash: hash.clone(),
        problem: conv.problem.to_string(),
        omega: conv.problem.lowest_frequency(),
        meshes,
        series,
    };
    Ok(vec![
        Artifact::new(file(cfg, "convergence.csv", cfg.outputs.csv.as_ref()), csv_bytes(&cfg.id, &hash, &columns, &rows)),
        Artifact::json(summary_name(cfg), &summary),
    ])
}

#[derive(Debug, Clone)]
pub struct DynamicsRun {
    pub label: String,
    pub critical_dt: f64,
    pub samples: Vec<ErrorSample>,
    pub trajectory: Trajectory,
}

impl DynamicsRun {
    pub fn steps(&self) -> usize {
        self.trajectory.config.steps
    }

    /// Error at the sample nearest to `t`.
    pub fn error_at(&self, t: f64) -> f64 {
        self.samples
            .iter()
            .min_by(|a, b| (a.requested - t).abs().total_cmp(&(b.requested - t).abs()))
            .map_or(f64::NAN, |s| s.error)
    }
}

/// Central-difference runs of the configured problem for every operator.
pub fn dynamics_runs(cfg: &ExperimentConfig) -> Result<(DiscreteModel, Vec<DynamicsRun>)> {
    require_operators(cfg)?;
    let dy = cfg.dynamics.as_ref().ok_or_else(|| Error::config(format!("{}: missing `dynamics`", cfg.id)))?;
    let model = build_model(cfg)?;
    let n = model.n_free();
    let ctx = |what: &str| format!("{}: {what}", cfg.id);
    type Exact = fn(&[f64], f64) -> f64;
    let (u0, v0, load, exact): (Vec<f64>, Vec<f64>, Option<Vec<f64>>, Exact) = match dy.problem {
        DynamicsProblem::String1d => {
            if cfg.param_dim() != 1 {
                return Err(Error::config("string_1d runs on the unit interval"));
            }
            let u0 = model.project(&|x| string_solution(x[0], 0.0)).map_err(numerical(ctx("initial data")))?;
            (u0, vec![0.0; n], None, |x, t| string_solution(x[0], t))
        }
        DynamicsProblem::QuarterAnnulus => {
            if !matches!(model.geometry(), GeometryMap::QuarterAnnulus) {
                return Err(Error::config("quarter_annulus runs on the quarter_annulus geometry"));
            }
            let v0 = model.project(&|x| annulus_velocity0(x[0], x[1])).map_err(numerical(ctx("initial data")))?;
            // forcing is g(x) sin(2πt); assemble g once
            let g = model.load_vector(&|x| annulus_forcing(x[0], x[1], 0.25));
            (vec![0.0; n], v0, Some(g), |x, t| annulus_solution(x[0], x[1], t))
        }
    };
    let force = |t: f64| match &load {
        Some(g) => {
            let s = (2.0 * PI * t).sin();
            g.iter().map(|v| v * s).collect()
        }
        None => vec![0.0; n],
    };
    let times: Vec<f64> = (0..=dy.samples).map(|k| dy.t_final * k as f64 / dy.samples as f64).collect();
    let k = model.stiffness();
    let shared = if dy.shared_step {
        Some(central_difference_config(&model.mass_operator(), k, dy.t_final, dy.safety).map_err(numerical(ctx("M")))?)
    } else {
        None
    };
    let mut runs = Vec::new();
    for op in &cfg.operators {
        let m = build_operator(&model, op)?;
        let label = op.label();
        let critical_dt = lumplab_core::pencil::critical_dt(k, &m).map_err(numerical(ctx(&label)))?;
        let step: NewmarkConfig = match shared {
            Some(c) => c,
            None => central_difference_config(&m, k, dy.t_final, dy.safety).map_err(numerical(ctx(&label)))?,
        };
        let trajectory = newmark(&m, k, &force, &u0, &v0, &step).map_err(numerical(ctx(&label)))?;
        let samples = transient_l2_series(&model, &trajectory, &exact, &times).map_err(numerical(ctx(&label)))?;
        runs.push(DynamicsRun { label, critical_dt, samples, trajectory });
    }
    Ok((model, runs))
}

#[derive(Debug, Serialize)]
struct RunSummary {
    label: String,
    critical_dt: f64,
    dt: f64,
    steps: usize,
    final_error: f64,
    max_error: f64,
}

#[derive(Debug, Serialize)]
struct DynamicsSummary {
    id: String,
    config_hash: String,
    n: usize,
    t_final: f64,
    safety: f64,
    runs: Vec<RunSummary>,
}

pub fn run_dynamics(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (model, runs) = dynamics_runs(cfg)?;
    let dy = cfg.dynamics.as_ref().expect("checked by dynamics_runs");
    let hash = cfg.hash();
    let mut files = Vec::new();

    let mut columns = vec!["t".to_string()];
    columns.extend(runs.iter().map(|r| r.label.clone()));
    let rows: Vec<Vec<String>> = (0..=dy.samples)
        .map(|k| {
            let mut row = vec![fmt_f64(runs[0].samples[k].requested)];
            row.extend(runs.iter().map(|r| fmt_f64(r.samples[k].error)));
            row
        })
        .collect();
    files.push(Artifact::new(file(cfg, "l2_error.csv", cfg.outputs.csv.as_ref()), csv_bytes(&cfg.id, &hash, &columns, &rows)));

    let mut columns = vec!["dof".to_string()];
    columns.extend(runs.iter().map(|r| r.label.clone()));
    let rows: Vec<Vec<String>> = (0..model.n_free())
        .map(|i| {
            let mut row = vec![i.to_string()];
            row.extend(runs.iter().map(|r| fmt_f64(r.trajectory.u[r.trajectory.len() - 1][i])));
            row
        })
        .collect();
    files.push(Artifact::new(format!("{}_final_state.csv", cfg.id), csv_bytes(&cfg.id, &hash, &columns, &rows)));

    if dy.dump_trajectory {
        let probe = model.n_free() / 2;
        for r in &runs {
            let t = &r.trajectory;
            let cols = vec!["t".to_string(), format!("u[{probe}]")];
            let rows: Vec<Vec<String>> =
                (0..t.len()).map(|s| vec![fmt_f64(t.config.time(s)), fmt_f64(t.u[s][probe])]).collect();
            let stem = format!("{}_{}", cfg.id, r.label.replace('~', "t"));
            files.push(Artifact::new(format!("{stem}_trajectory.csv"), csv_bytes(&cfg.id, &hash, &cols, &rows)));
            files.push(Artifact::new(format!("{stem}.traj"), trajectory_bytes(t)));
        }
    }

    let summary = DynamicsSummary {
        id: cfg.id.clone(),
        config_hash: hash,
        n: model.n_free(),
        t_final: dy.t_final,
        safety: dy.safety,
        runs: runs
            .iter()
            .map(|r| RunSummary {
                label: r.label.clone(),
                critical_dt: r.critical_dt,
                dt: r.trajectory.config.dt,
                steps: r.steps(),
                final_error: r.samples.last().map_or(f64::NAN, |s| s.error),
                max_error: r.samples.iter().map(|s| s.error).fold(0.0, f64::max),
            })
            .collect(),
    };
    files.push(Artifact::json(summary_name(cfg), &summary));
    Ok(files)
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoLevelCheck {
    pub i: usize,
    /// `λ_k(K, P̃_ii) ≤ λ_k(K, M̃)` for every `k`.
    pub below_nkp: bool,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NkpReport {
    pub id: String,
    pub config_hash: String,
    pub dims: Vec<usize>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub sigma2_over_sigma1: f64,
    /// `‖M − B ⊗ C‖_F` from the singular values.
    pub error: f64,
    /// The same norm measured on the materialized approximation.
    pub measured_error: f64,
    pub asymmetry: f64,
    pub hoffman_wielandt: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cond_bound: Option<CondBound>,
    /// Whether the truncation used for the bound is the full Kronecker rank.
    pub cond_bound_exact: bool,
    pub two_level: Vec<TwoLevelCheck>,
    pub scan: Vec<ScanRow>,
}

pub fn nkp_report(cfg: &ExperimentConfig) -> Result<(NkpReport, NkpResult)> {
    if cfg.param_dim() != 2 {
        return Err(Error::config(format!("{}: nkp experiments need a planar geometry", cfg.id)));
    }
    let settings = cfg.nkp.clone().unwrap_or(crate::config::NkpSettings { rank: 2, scan: vec![], lumped: vec![] });
    let model = build_model(cfg)?;
    let ctx = |what: &str| format!("{}: {what}", cfg.id);
    let d = model.free_dims();
    let m = model.mass();
    let r1 = nkp_rank1(m, d[0], d[1]).map_err(numerical(ctx("rank-1 approximation")))?;
    let mt = r1.materialize().map_err(numerical(ctx("rank-1 approximation")))?;
    let measured_error = m.sub(&mt).frobenius_norm();
    let hoffman_wielandt = hoffman_wielandt_check(m, &mt).map_err(numerical(ctx("Hoffman-Wielandt")))?;

    let r = settings.rank.min(r1.rank);
    let cond = if r >= 2 {
        let op = nkp_rank_r(m, d[0], d[1], r).map_err(numerical(ctx("truncated approximation")))?;
        Some(cond_bound(&op).map_err(numerical(ctx("condition bound")))?)
    } else {
        None
    };

    let mut two_level = Vec::new();
    if !settings.lumped.is_empty() {
        let k = model.stiffness();
        let base = gen_eigvals(k, &mt).map_err(numerical(ctx("(K, M~)")))?;
        for &i in &settings.lumped {
            let p = r1.lumped(i).map_err(numerical(ctx(&format!("P~{i}{i}"))))?;
            let pd = kron_materialize(&p, DEFAULT_DENSE_CAP).map_err(numerical(ctx(&format!("P~{i}{i}"))))?;
            let vals = gen_eigvals(k, &pd).map_err(numerical(ctx(&format!("(K, P~{i}{i})"))))?;
            let v = ordering_violation(&vals, &base);
            two_level.push(TwoLevelCheck { i, below_nkp: v <= ORDER_TOL, max_violation: v });
        }
    }

    let scan = if settings.scan.is_empty() {
        Vec::new()
    } else {
        let geometry = catalogue::geometry(&cfg.discretization.geometry)?;
        let ends = cfg.ends();
        spectral_equivalence_scan(
            cfg.discretization.degree,
            &settings.scan,
            &cfg.discretization.density,
            &geometry,
            [ends[0], ends[1]],
        )
    };

    let s = &r1.singular_values;
    let report = NkpReport {
        id: cfg.id.clone(),
        config_hash: cfg.hash(),
        dims: d,
        rank: r1.rank,
        singular_values: s.clone(),
        sigma2_over_sigma1: s.get(1).map_or(0.0, |x| x / s[0]),
        error: r1.error,
        measured_error,
        asymmetry: r1.asymmetry,
        hoffman_wielandt,
        cond_bound_exact: cond.is_some() && r == r1.rank,
        cond_bound: cond,
        two_level,
        scan,
    };
    Ok((report, r1))
}

pub fn run_nkp(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (report, r1) = nkp_report(cfg)?;
    let hash = &report.config_hash;
    let s = &report.singular_values;
    let columns = vec!["index".to_string(), "sigma".to_string(), "sigma_over_sigma1".to_string()];
    let rows: Vec<Vec<String>> =
        s.iter().enumerate().map(|(i, x)| vec![(i + 1).to_string(), fmt_f64(*x), fmt_f64(x / s[0])]).collect();
    let mut files = vec![
        Artifact::new(file(cfg, "singular_values.csv", cfg.outputs.csv.as_ref()), csv_bytes(&cfg.id, hash, &columns, &rows)),
        Artifact::new(format!("{}_B.mtx", cfg.id), matrix_market(&r1.factors[0])),
        Artifact::new(format!("{}_C.mtx", cfg.id), matrix_market(&r1.factors[1])),
    ];
    if let Some(cb) = &report.cond_bound {
        files.push(Artifact::json(format!("{}_cond_bound.json", cfg.id), cb));
    }
    if !report.scan.is_empty() {
        let columns: Vec<String> =
            ["m", "h", "lambda_min", "lambda_max"].iter().map(|s| s.to_string()).collect();
        let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), fmt_f64);
        let rows: Vec<Vec<String>> = report
            .scan
            .iter()
            .map(|r| vec![r.subdivisions.to_string(), fmt_f64(r.h), opt(r.lambda_min), opt(r.lambda_max)])
            .collect();
        files.push(Artifact::new(format!("{}_spectral_equivalence.csv", cfg.id), csv_bytes(&cfg.id, hash, &columns, &rows)));
    }
    files.push(Artifact::json(summary_name(cfg), &report));
    Ok(files)
}

#[derive(Debug, Serialize)]
struct AssembleSidecar {
    id: String,
    config_hash: String,
    degrees: Vec<usize>,
    subdivisions: Vec<usize>,
    geometry: String,
    density: String,
    free_dofs: usize,
    free_dims: Vec<usize>,
    separable: bool,
    total_mass: f64,
}

pub fn run_assemble(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let model = build_model(cfg)?;
    let dim = cfg.param_dim();
    let sidecar = AssembleSidecar {
        id: cfg.id.clone(),
        config_hash: cfg.hash(),
        degrees: vec![cfg.discretization.degree; dim],
        subdivisions: vec![cfg.discretization.subdivisions; dim],
        geometry: cfg.discretization.geometry.clone(),
        density: model.density().id().to_string(),
        free_dofs: model.n_free(),
        free_dims: model.free_dims(),
        separable: model.is_separable(),
        total_mass: model.total_mass(),
    };
    Ok(vec![
        Artifact::new(format!("{}_M.mtx", cfg.id), matrix_market(model.mass())),
        Artifact::new(format!("{}_K.mtx", cfg.id), matrix_market(model.stiffness())),
        Artifact::json(format!("{}_model.json", cfg.id), &sidecar),
    ])
}

#[derive(Debug, Serialize)]
struct LumpEntry {
    label: String,
    file: String,
    critical_dt: f64,
    /// `Δt_c(K, M̃) / Δt_c(K, M)`
    step_gain: f64,
}

#[derive(Debug, Serialize)]
struct LumpSummary {
    id: String,
    config_hash: String,
    operators: Vec<LumpEntry>,
}

pub fn run_lump(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    require_operators(cfg)?;
    let model = build_model(cfg)?;
    let k = model.stiffness();
    let ctx = |l: &str| format!("{}: {l}", cfg.id);
    let base = lumplab_core::pencil::critical_dt(k, &model.mass_operator()).map_err(numerical(ctx("M")))?;
    let mut files = Vec::new();
    let mut operators = Vec::new();
    for op in &cfg.operators {
        let label = op.label();
        let m = build_operator(&model, op)?;
        let dense: SymMatrix = m.to_sym(DEFAULT_DENSE_CAP).map_err(numerical(ctx(&label)))?;
        let dt = lumplab_core::pencil::critical_dt(k, &m).map_err(numerical(ctx(&label)))?;
        let name = format!("{}_{}.mtx", cfg.id, label.replace('~', "t").replace(',', "_"));
        files.push(Artifact::new(name.clone(), matrix_market(&dense)));
        operators.push(LumpEntry { label, file: name, critical_dt: dt, step_gain: dt / base });
    }
    files.push(Artifact::json(summary_name(cfg), &LumpSummary { id: cfg.id.clone(), config_hash: cfg.hash(), operators }));
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::preset;

    #[test]
    fn trivial_problem_has_one_row() {
        let files = run_spectrum(&preset("trivial_1x1").unwrap()).unwrap();
        let (_, header, rows) = crate::io::read_csv(&files[0].bytes).unwrap();
        assert_eq!(header, ["k", "M", "P1"]);
        assert_eq!(rows.len(), 1);
        // M = [1/3], K = [4]
        assert!((rows[0][1] - 12.0).abs() < 1e-10);
    }

    #[test]
    fn outputs_are_deterministic() {
        let cfg = preset("nkp_stretched_square").unwrap();
        assert_eq!(run_nkp(&cfg).unwrap(), run_nkp(&cfg).unwrap());
    }

    #[test]
    fn separable_square_has_kronecker_rank_one() {
        let (r, _) = nkp_report(&preset("nkp_unit_square").unwrap()).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.sigma2_over_sigma1 <= 1e-12);
        assert!(r.two_level.iter().all(|c| c.below_nkp));
    }

    #[test]
    fn stretched_square_has_rank_two() {
        let (r, _) = nkp_report(&preset("nkp_stretched_square").unwrap()).unwrap();
        assert_eq!(r.rank, 2);
        let cb = r.cond_bound.unwrap();
        assert!(r.cond_bound_exact);
        assert!(cb.holds(1e-8).unwrap_or(true));
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powi(4)).collect();
        assert!((loglog_slope(&x, &y) - 4.0).abs() < 1e-12);
    }
}
