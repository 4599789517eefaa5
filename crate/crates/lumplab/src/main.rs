use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lumplab::config::{self, SCHEMA};
use lumplab::io::{write_atomic, Artifact};
use lumplab::{catalogue, experiments, verify, Error, ExperimentConfig, Result};
use rayon::prelude::*;

/// Mass lumping, Kronecker preconditioners and explicit dynamics for spline discretizations.
#[derive(Debug, Parser)]
#[command(name = "lumplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for batches and the check suite.
    #[arg(long, global = true, env = "LUMPLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Experiment config: one JSON object or an array of them.
    #[arg(long, env = "LUMPLAB_CONFIG", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Catalogue experiment id; repeat for a batch.
    #[arg(long, env = "LUMPLAB_PRESET", value_delimiter = ',')]
    preset: Vec<String>,
    /// Output directory.
    #[arg(long, env = "LUMPLAB_OUT", default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of every config.
    #[arg(long, env = "LUMPLAB_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the stiffness and mass matrices.
    Assemble(Inputs),
    /// Generalized spectra of `(K, M~)` for every operator.
    Spectrum(Inputs),
    /// Export the configured mass operators and their critical steps.
    Lump(Inputs),
    /// Nearest Kronecker product study.
    Nkp(Inputs),
    /// Central-difference time integration.
    Integrate(Inputs),
    /// Lowest-frequency convergence study.
    Converge(Inputs),
    /// Run the invariant suite.
    Verify {
        /// Run a single check.
        #[arg(long)]
        check: Option<String>,
        /// Directory for `verify_report.json`.
        #[arg(long, env = "LUMPLAB_OUT")]
        out: Option<PathBuf>,
        #[arg(long, env = "LUMPLAB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Print the config JSON schema.
    Schema,
    /// List catalogue experiment ids.
    Presets,
}

type Runner = fn(&ExperimentConfig) -> Result<Vec<Artifact>>;

fn load(inputs: &Inputs) -> Result<Vec<ExperimentConfig>> {
    let mut cfgs = match (&inputs.config, inputs.preset.is_empty()) {
        (Some(path), _) => config::load(path)?,
        (None, false) => inputs.preset.iter().map(|id| catalogue::preset(id)).collect::<Result<_>>()?,
        (None, true) => return Err(Error::config("pass --config <path> or --preset <id>")),
    };
    if let Some(seed) = inputs.seed {
        cfgs.iter_mut().for_each(|c| c.seed = seed);
    }
    Ok(cfgs)
}

fn run_batch(inputs: &Inputs, runner: Runner) -> Result<()> {
    let cfgs = load(inputs)?;
    let outputs: Vec<Vec<Artifact>> = cfgs.par_iter().map(runner).collect::<Result<_>>()?;
    let mut names = BTreeSet::new();
    for a in outputs.iter().flatten() {
        if !names.insert(a.name.as_str()) {
            return Err(Error::config(format!("two experiments write `{}`", a.name)));
        }
    }
    for a in outputs.iter().flatten() {
        println!("{}", write_atomic(&inputs.out, a)?.display());
    }
    Ok(())
}

fn run_verify(check: Option<&str>, out: Option<&PathBuf>, seed: u64) -> Result<()> {
    let results = match check {
        Some(id) => vec![verify::run_one(id, seed)?],
        None => verify::run_all(seed),
    };
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.detail);
    }
    if let Some(dir) = out {
        write_atomic(dir, &Artifact::json("verify_report.json", &results))?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Error::ChecksFailed { failed, total: results.len() });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Assemble(i) => run_batch(&i, experiments::run_assemble),
        Command::Spectrum(i) => run_batch(&i, experiments::run_spectrum),
        Command::Lump(i) => run_batch(&i, experiments::run_lump),
        Command::Nkp(i) => run_batch(&i, experiments::run_nkp),
        Command::Integrate(i) => run_batch(&i, experiments::run_dynamics),
        Command::Converge(i) => run_batch(&i, experiments::run_convergence),
        Command::Verify { check, out, seed } => run_verify(check.as_deref(), out.as_ref(), seed),
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(())
        }
        Command::Presets => {
            catalogue::ids().iter().for_each(|id| println!("{id}"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lumplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
