//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::{Command, ExitCode};

use lumplab::catalogue::preset;
use lumplab::experiments::dynamics_runs;
use lumplab::verify::run_one;

struct Line {
    criterion: &'static str,
    passed: bool,
    detail: String,
}

fn checks(criterion: &'static str, ids: &[&str]) -> Line {
    let results: Vec<_> = ids.iter().map(|id| run_one(id, 0).expect("registered check")).collect();
    Line {
        criterion,
        passed: results.iter().all(|r| r.passed),
        detail: results.iter().map(|r| format!("{}: {}", r.id, r.detail)).collect::<Vec<_>>().join(" | "),
    }
}

/// Step counts `(M, P11, P22, P33)` reported for the quarter annulus.
const ANNULUS_COUNTS: [(&str, usize); 4] = [("M", 322), ("P11", 139), ("P22", 289), ("P33", 320)];

fn annulus_counts(id: &str) -> Vec<(&'static str, usize, f64)> {
    let (_, runs) = dynamics_runs(&preset(id).unwrap()).unwrap();
    ANNULUS_COUNTS
        .iter()
        .map(|&(label, want)| {
            let n = runs.iter().find(|r| r.label == label).unwrap().steps();
            (label, n, (n as f64 - want as f64) / want as f64)
        })
        .collect()
}

fn dynamics() -> Line {
    let base = checks("10", &["scalar_stability_boundary", "string_error_ordering", "annulus_step_ordering"]);
    let at_one = annulus_counts("elastodynamics_2d");
    let counts_ok = at_one.iter().all(|(_, _, rel)| rel.abs() <= 0.15);
    let show = |v: &[(&str, usize, f64)]| {
        v.iter().map(|(l, n, rel)| format!("{l} {n} ({:+.1}%)", 100.0 * rel)).collect::<Vec<_>>().join(", ")
    };
    let at_085 = annulus_counts("elastodynamics_2d_safety085");
    Line {
        criterion: "10",
        passed: base.passed && counts_ok,
        detail: format!(
            "{} | counts vs (322, 139, 289, 320) at safety 1: {} | at safety 0.85: {}",
            base.detail,
            show(&at_one),
            show(&at_085)
        ),
    }
}

fn verify_binary() -> Line {
    let o = Command::new(env!("CARGO_BIN_EXE_lumplab")).arg("verify").output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    Line {
        criterion: "12",
        passed: o.status.code() == Some(0),
        detail: format!("`lumplab verify` exit {:?}, {} checks, failing: {:?}", o.status.code(), stdout.lines().count(), failed),
    }
}

fn main() -> ExitCode {
    let lines = [
        checks("1", &["indefinite_example"]),
        checks("2", &["row_sum_spectrum"]),
        checks("3", &["monotone_chain_1d", "monotone_chain_2d"]),
        checks("4", &["critical_step_never_shrinks"]),
        checks("5", &["convergence_slopes"]),
        checks("6", &["nkp_error_identity"]),
        checks("7", &["appendix_rank"]),
        checks("8", &["cond_bound"]),
        checks("9", &["bauer_fike_lumped", "bauer_fike_random"]),
        dynamics(),
        checks("11", &["solver_oracles"]),
        verify_binary(),
    ];
    for l in &lines {
        println!("criterion {:>2}: {} {}", l.criterion, if l.passed { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
