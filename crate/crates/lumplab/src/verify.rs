//! The invariant suite behind `lumplab verify`.

use lumplab_core::dynamics::{newmark, DynamicsError, NewmarkConfig};
use lumplab_core::linalg::{
    banded_cholesky_solve, kron_solve, sym_eigvals, thomas_solve, BandedSpd, Factor, KronOperator, KronTerm,
    MassOperator, SymMatrix,
};
use lumplab_core::lumping::lump;
use lumplab_core::nkp::cond_bound;
use lumplab_core::pencil::{bauer_fike_bounds, critical_dt, gen_eigvals, Pencil, BAUER_FIKE_A, BAUER_FIKE_B, CRAWFORD};
use lumplab_core::splinefem::{assemble_1d, Density, EndConditions, GeometryMap, SplineSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalogue;
use crate::config::OperatorSpec;
use crate::error::{Error, Result};
use crate::experiments::{
    build_model, build_operator, convergence_series, dynamics_runs, nkp_report, ordering_violation, spectra, ORDER_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult { id, passed, detail: detail.into() }
    }

    fn from(id: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(id, passed, detail),
            Err(e) => Self::new(id, false, format!("error: {e}")),
        }
    }
}

type Check = fn(u64) -> Result<(bool, String)>;

pub const CHECKS: &[(&str, Check)] = &[
    ("indefinite_example", indefinite_example),
    ("row_sum_spectrum", row_sum_spectrum),
    ("monotone_chain_1d", monotone_chain_1d),
    ("monotone_chain_2d", monotone_chain_2d),
    ("critical_step_never_shrinks", critical_step),
    ("convergence_slopes", convergence_slopes),
    ("nkp_error_identity", nkp_error_identity),
    ("appendix_rank", appendix_rank),
    ("cond_bound", cond_bound_check),
    ("bauer_fike_lumped", bauer_fike_lumped),
    ("bauer_fike_random", bauer_fike_random),
    ("scalar_stability_boundary", scalar_stability),
    ("string_error_ordering", string_error_ordering),
    ("annulus_step_ordering", annulus_step_ordering),
    ("solver_oracles", solver_oracles),
];

/// Runs every check in parallel; results keep the order of [`CHECKS`].
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    CHECKS.par_iter().map(|(id, f)| CheckResult::from(id, f(seed))).collect()
}

pub fn run_one(id: &str, seed: u64) -> Result<CheckResult> {
    let (id, f) =
        CHECKS.iter().find(|(c, _)| *c == id).ok_or_else(|| Error::config(format!("unknown check `{id}`")))?;
    Ok(CheckResult::from(id, f(seed)))
}

fn num(context: &str) -> impl Fn(&dyn std::fmt::Display) -> Error + '_ {
    move |e| Error::Numerical { context: context.to_string(), message: e.to_string() }
}

macro_rules! tryn {
    ($e:expr, $ctx:expr) => {
        $e.map_err(|e| num($ctx)(&e))?
    };
}

fn indefinite_example(_: u64) -> Result<(bool, String)> {
    let a = SymMatrix::from_diag(&[6.0, 6.0]);
    let b = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let bt = SymMatrix::from_diag(&[3.0, 2.0]);
    let mut got = tryn!(gen_eigvals(&a, &b), "(A, B)");
    got.extend(tryn!(gen_eigvals(&a, &bt), "(A, B~)"));
    got.extend(tryn!(sym_eigvals(&bt.sub(&b)), "E"));
    let s5 = 5f64.sqrt();
    let want = [2.0, 6.0, 2.0, 3.0, (1.0 - s5) / 2.0, (1.0 + s5) / 2.0];
    let err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-12, format!("max abs error {err:.2e}")))
}

fn row_sum_spectrum(_: u64) -> Result<(bool, String)> {
    let mut worst = (0.0f64, f64::INFINITY);
    let mut ok = true;
    for p in 1..=5 {
        for m in [10, 50] {
            let space = tryn!(SplineSpace::new(p, m), "space");
            let model = tryn!(
                assemble_1d(&space, &Density::Constant(1.0), &GeometryMap::UnitInterval, EndConditions::dirichlet()),
                "assembly"
            );
            let mass = model.mass();
            let ev = tryn!(gen_eigvals(mass, &lump(mass)), "(M, L(M))");
            let (lo, hi) = (ev[0], ev[ev.len() - 1]);
            ok &= lo > 0.0 && hi <= 1.0 + 1e-10 && (hi - 1.0).abs() <= 1e-10;
            worst = (worst.0.max((hi - 1.0).abs()), worst.1.min(lo));
        }
    }
    Ok((ok, format!("10 pencils, max |lambda_max - 1| {:.2e}, min lambda {:.3e}", worst.0, worst.1)))
}

/// Consecutive operators of a preset must be ordered `λ_k(K, op_{j+1}) ≤ λ_k(K, op_{j+2})` with `M` last.
fn chain(ids: &[&str]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut details = Vec::new();
    for id in ids {
        let cfg = catalogue::preset(id)?;
        let model = build_model(&cfg)?;
        let mut s = spectra(&cfg, &model)?;
        // presets list M first; the chain ends with it
        s.rotate_left(1);
        let worst = s.windows(2).map(|w| ordering_violation(&w[0].1, &w[1].1)).fold(0.0, f64::max);
        let labels: Vec<&str> = s.iter().map(|(l, _)| l.as_str()).collect();
        ok &= worst <= ORDER_TOL;
        details.push(format!("{id} {} (worst {worst:.1e})", labels.join("<=")));
    }
    Ok((ok, details.join("; ")))
}

fn monotone_chain_1d(_: u64) -> Result<(bool, String)> {
    chain(&["laplace_1d_p3_m400", "laplace_1d_p5_m400"])
}

fn monotone_chain_2d(_: u64) -> Result<(bool, String)> {
    chain(&["laplace_2d_p3_m20", "laplace_2d_p5_m20"])
}

fn critical_step(_: u64) -> Result<(bool, String)> {
    let mut seen = Vec::new();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for cfg in catalogue::all() {
        let key = serde_json::to_string(&cfg.discretization).expect("serializable");
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let model = build_model(&cfg)?;
        let k = model.stiffness();
        let base = tryn!(critical_dt(k, &model.mass_operator()), &cfg.id);
        for i in 1..=3 {
            let op = build_operator(&model, &OperatorSpec::Banded { i })?;
            let dt = tryn!(critical_dt(k, &op), &cfg.id);
            let r = dt / base;
            worst = worst.min(r);
            ok &= r >= 1.0 - 1e-10;
        }
    }
    Ok((ok, format!("{} models, min dt(P_i)/dt(M) = {worst:.6}", seen.len())))
}

fn convergence_slopes(_: u64) -> Result<(bool, String)> {
    let cfg = catalogue::preset("accuracy_1d_p3")?;
    let (_, series) = convergence_series(&cfg)?;
    let get = |l: &str| series.iter().find(|s| s.label == l).expect("preset operators");
    let (m, p1, p3) = (get("M"), get("P1"), get("P3"));
    let gain = p1.errors[3] / p3.errors[3];
    let ok = (m.slope - 6.0).abs() <= 0.5
        && (p1.slope - 2.0).abs() <= 0.3
        && (p3.slope - 2.0).abs() <= 0.3
        && gain >= 10.0;
    Ok((ok, format!("slopes M {:.3}, P1 {:.3}, P3 {:.3}; P1/P3 at m=64 {gain:.1}", m.slope, p1.slope, p3.slope)))
}

fn nkp_error_identity(_: u64) -> Result<(bool, String)> {
    let (r, _) = nkp_report(&catalogue::preset("nkp_appendix")?)?;
    let rel = (r.error - r.measured_error).abs() / r.measured_error;
    let (lhs, rhs) = r.hoffman_wielandt;
    let ok = rel <= 1e-10 && lhs <= rhs * (1.0 + 1e-10);
    Ok((ok, format!("identity rel diff {rel:.2e}; Hoffman-Wielandt {lhs:.3e} <= {rhs:.3e}")))
}

fn appendix_rank(_: u64) -> Result<(bool, String)> {
    let (r, _) = nkp_report(&catalogue::preset("nkp_appendix")?)?;
    Ok(((5..=7).contains(&r.rank), format!("numerical Kronecker rank {}", r.rank)))
}

fn random_kron_pair(rng: &mut ChaCha8Rng) -> Result<KronOperator> {
    let spd = |rng: &mut ChaCha8Rng, n: usize| {
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
        })
    };
    let (n1, n2) = (rng.gen_range(2..6), rng.gen_range(2..6));
    let w = rng.gen_range(0.01..0.3);
    let terms = vec![
        KronTerm::new(1.0, vec![Factor::Dense(spd(rng, n1)), Factor::Dense(spd(rng, n2))]),
        KronTerm::new(w, vec![Factor::Dense(spd(rng, n1)), Factor::Dense(spd(rng, n2))]),
    ];
    KronOperator::new(terms).map_err(|e| num("synthetic pair")(&e))
}

fn cond_bound_check(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tested, mut ok) = (0, true);
    for _ in 0..40 {
        let cb = tryn!(cond_bound(&random_kron_pair(&mut rng)?), "synthetic pair");
        if let Some(h) = cb.holds(1e-8) {
            tested += 1;
            ok &= h;
        }
    }
    let (r, _) = nkp_report(&catalogue::preset("nkp_stretched_square")?)?;
    let geo = match (&r.cond_bound, r.cond_bound_exact) {
        (Some(cb), true) => {
            let h = cb.holds(1e-8);
            ok &= h.unwrap_or(true);
            format!("stretched_square kappa {:.4}, bound {:?}", cb.kappa, cb.bound)
        }
        _ => {
            ok = false;
            format!("stretched_square has rank {}, expected 2", r.rank)
        }
    };
    Ok((ok, format!("{tested} synthetic pairs with delta < 1; {geo}")))
}

fn bauer_fike_lumped(_: u64) -> Result<(bool, String)> {
    let model = build_model(&catalogue::preset("row_sum_1d_p1_m100")?)?;
    let (k, m) = (model.stiffness().clone(), model.mass().clone());
    let p = tryn!(Pencil::new(k.clone(), m.clone()), "(K, M)");
    let pt = tryn!(Pencil::new(k, lump(&m)), "(K, L(M))");
    let r = tryn!(bauer_fike_bounds(&p, &pt), "bounds");
    let counts: Vec<usize> = [BAUER_FIKE_A, BAUER_FIKE_B, CRAWFORD].iter().map(|n| r.named(n).count()).collect();
    let bad = r.violations(1e-10).len();
    Ok((bad == 0 && counts.iter().all(|&c| c == model.n_free()), format!("{} entries, {bad} violations", r.entries.len())))
}

fn bauer_fike_random(seed: u64) -> Result<(bool, String)> {
    let mut bad = 0;
    for s in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s));
        let n = 6;
        let spd = |rng: &mut ChaCha8Rng, shift: f64| {
            let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            SymMatrix::from_fn(n, |i, j| {
                (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum::<f64>() + if i == j { shift } else { 0.0 }
            })
        };
        let a = spd(&mut rng, 0.5);
        let b = spd(&mut rng, 1.0);
        let eps = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let e = spd(&mut rng, 0.0).sub(&SymMatrix::identity(n)).scaled(eps);
        let f = spd(&mut rng, 0.0).scaled(eps);
        let p = tryn!(Pencil::new(a.clone(), b.clone()), "pencil");
        let pt = tryn!(Pencil::new(a.add(&e), b.add(&f)), "pencil");
        if !tryn!(bauer_fike_bounds(&p, &pt), "bounds").all_hold(1e-10) {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("50 pencils (n=6), {bad} with violations")))
}

/// `u'' + u = 0` has `Δt_c = 2`.
fn scalar_run(factor: f64) -> std::result::Result<(), DynamicsError> {
    let m = MassOperator::Dense(SymMatrix::identity(1));
    let k = SymMatrix::identity(1);
    let steps = 100_000;
    let dt = 2.0 * factor;
    let cfg = NewmarkConfig::central_difference(dt * steps as f64, steps)?;
    newmark(&m, &k, &|_| vec![0.0], &[1.0], &[0.0], &cfg).map(|_| ())
}

fn scalar_stability(_: u64) -> Result<(bool, String)> {
    let below = scalar_run(0.999);
    let above = scalar_run(1.001);
    let ok = below.is_ok() && matches!(above, Err(DynamicsError::Unstable { .. }));
    Ok((ok, format!("0.999 dt_c: {below:?}; 1.001 dt_c: {above:?}")))
}

fn string_error_ordering(_: u64) -> Result<(bool, String)> {
    let (_, runs) = dynamics_runs(&catalogue::preset("elastodynamics_1d")?)?;
    let err = |l: &str| runs.iter().find(|r| r.label == l).expect("preset operators").error_at(5.0);
    let (p1, p2, p3) = (err("P1"), err("P2"), err("P3"));
    Ok((p3 <= p2 && p2 <= p1, format!("error at t=5: M {:.3e}, P1 {p1:.3e}, P2 {p2:.3e}, P3 {p3:.3e}", err("M"))))
}

fn annulus_step_ordering(_: u64) -> Result<(bool, String)> {
    let (_, runs) = dynamics_runs(&catalogue::preset("elastodynamics_2d")?)?;
    let n = |l: &str| runs.iter().find(|r| r.label == l).expect("preset operators").steps();
    let (m, p11, p22, p33) = (n("M"), n("P11"), n("P22"), n("P33"));
    Ok((p11 < p22 && p22 < p33 && p33 <= m, format!("steps M {m}, P11 {p11}, P22 {p22}, P33 {p33}")))
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
fn dense_oracle(a: &SymMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).expect("nonempty");
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            let (top, rest) = m.split_at_mut(i);
            for (a, b) in rest[0][k..].iter_mut().zip(&top[k][k..]) {
                *a -= f * b;
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn banded_instance(rng: &mut ChaCha8Rng, n: usize, bw: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..(i + bw + 1).min(n) {
            m.set(i, j, rng.gen_range(0.0..1.0));
        }
    }
    for i in 0..n {
        let s: f64 = m.row(i).iter().sum();
        m.set(i, i, s + rng.gen_range(0.1..1.0));
    }
    m
}

fn solver_oracles(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let dims: Vec<usize> = (0..rng.gen_range(2..4)).map(|_| rng.gen_range(1..6)).collect();
        let fs: Vec<SymMatrix> = dims.iter().map(|&n| banded_instance(&mut rng, n, n)).collect();
        let op = tryn!(KronOperator::single(fs.iter().cloned().map(Factor::Dense).collect()), "kron");
        let full = fs[1..].iter().fold(fs[0].clone(), |acc, f| {
            let (n, m) = (acc.dim(), f.dim());
            SymMatrix::from_fn(n * m, |i, j| acc.get(i / m, j / m) * f.get(i % m, j % m))
        });
        let b: Vec<f64> = (0..full.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = tryn!(kron_solve(&op, &b), "kron_solve");
        worst[0] = worst[0].max(rel_diff(&x, &dense_oracle(&full, &b)));

        let (n, bw) = (rng.gen_range(1..40), rng.gen_range(0..6));
        let a = banded_instance(&mut rng, n, bw);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = tryn!(banded_cholesky_solve(&tryn!(BandedSpd::from_sym(&a, bw), "band"), &b), "banded");
        worst[1] = worst[1].max(rel_diff(&x, &dense_oracle(&a, &b)));

        let n = rng.gen_range(1..60);
        let a = banded_instance(&mut rng, n, 1);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = tryn!(thomas_solve(&tryn!(BandedSpd::from_sym(&a, 1), "band"), &b), "thomas");
        worst[2] = worst[2].max(rel_diff(&x, &dense_oracle(&a, &b)));
    }
    let ok = worst.iter().all(|&w| w <= 1e-10);
    Ok((ok, format!("100 instances each; worst kron {:.1e}, banded {:.1e}, thomas {:.1e}", worst[0], worst[1], worst[2])))
}
