//! Strict JSON experiment configuration.

use std::fmt;
use std::path::Path;

use lumplab_core::splinefem::{Density, EndConditions, ProblemId};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::catalogue;
use crate::error::{Error, Result};

pub const SCHEMA: &str = include_str!("../data/experiment.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered catalogue id.
    pub id: String,
    pub discretization: Discretization,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nkp: Option<NkpSettings>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub degree: usize,
    pub subdivisions: usize,
    pub geometry: String,
    #[serde(default = "unit_density")]
    pub density: Density,
    /// One entry per parametric direction; empty means Dirichlet everywhere.
    #[serde(default)]
    pub ends: Vec<EndConditions>,
}

fn unit_density() -> Density {
    Density::Constant(1.0)
}

/// A mass-like operator to compare against the consistent mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Consistent,
    /// `P_i` of the assembled matrix.
    Banded { i: usize },
    /// `P_{i₁} ⊗ P_{i₂} [⊗ P_{i₃}]` of the separable factors.
    Kron { indices: Vec<usize> },
    /// Truncated Kronecker SVD of the mass.
    Nkp { rank: usize },
    /// `P̃_ii` built on the rank-1 Kronecker approximation.
    TwoLevel { i: usize },
}

impl OperatorSpec {
    pub fn label(&self) -> String {
        let join = |v: &[usize]| {
            if v.iter().all(|&i| i < 10) {
                v.iter().map(usize::to_string).collect::<String>()
            } else {
                v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            }
        };
        match self {
            OperatorSpec::Consistent => "M".into(),
            OperatorSpec::Banded { i } => format!("P{i}"),
            OperatorSpec::Kron { indices } => format!("P{}", join(indices)),
            OperatorSpec::Nkp { rank } => format!("NKP{rank}"),
            OperatorSpec::TwoLevel { i } => format!("P~{i}{i}"),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSettings {
    pub problem: ProblemId,
    pub meshes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsProblem {
    /// `u = sin(4πx) cos(4πt)` on the unit interval.
    #[serde(rename = "string_1d")]
    String1d,
    /// Manufactured solution on the quarter annulus.
    QuarterAnnulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSettings {
    pub problem: DynamicsProblem,
    pub t_final: f64,
    pub safety: f64,
    /// Number of equal intervals of `[0, T]` at which the L² error is sampled.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub dump_trajectory: bool,
    /// Step every operator with the consistent-mass step instead of its own.
    #[serde(default)]
    pub shared_step: bool,
}

fn default_samples() -> usize {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NkpSettings {
    /// Truncation rank for the condition-number bound.
    #[serde(default = "default_rank")]
    pub rank: usize,
    /// Meshes of the spectral-equivalence scan.
    #[serde(default)]
    pub scan: Vec<usize>,
    /// Band indices of the two-level preconditioners `P̃_ii`.
    #[serde(default)]
    pub lumped: Vec<usize>,
}

fn default_rank() -> usize {
    2
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Name of the main CSV file; defaults to `<id>_<kind>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// Name of the JSON summary; defaults to `<id>_summary.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl ExperimentConfig {
    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn param_dim(&self) -> usize {
        match self.discretization.geometry.as_str() {
            "unit_interval" => 1,
            "unit_cube" => 3,
            _ => 2,
        }
    }

    pub fn ends(&self) -> Vec<EndConditions> {
        let d = &self.discretization;
        if d.ends.is_empty() {
            vec![EndConditions::dirichlet(); self.param_dim()]
        } else {
            d.ends.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !catalogue::ids().contains(&self.id.as_str()) {
            return Err(Error::config(format!("unknown experiment id `{}`", self.id)));
        }
        let d = &self.discretization;
        if !catalogue::GEOMETRIES.contains(&d.geometry.as_str()) {
            return Err(Error::config(format!("unknown geometry `{}`", d.geometry)));
        }
        if !(1..=10).contains(&d.degree) {
            return Err(Error::config("degree must lie in 1..=10"));
        }
        if d.subdivisions == 0 {
            return Err(Error::config("subdivisions must be positive"));
        }
        let dim = self.param_dim();
        if !d.ends.is_empty() && d.ends.len() != dim {
            return Err(Error::config(format!("expected {dim} end-condition entries, got {}", d.ends.len())));
        }
        match &d.density {
            Density::Constant(c) if !(*c > 0.0 && c.is_finite()) => {
                return Err(Error::config("density must be positive"));
            }
            Density::Tabulated(_) => return Err(Error::config("tabulated densities are only accepted through the library")),
            _ => {}
        }
        for op in &self.operators {
            match op {
                OperatorSpec::Banded { i } | OperatorSpec::TwoLevel { i } if *i == 0 => {
                    return Err(Error::config(format!("{op}: band index must be at least 1")));
                }
                OperatorSpec::Kron { indices } if indices.len() != dim || indices.contains(&0) => {
                    return Err(Error::config(format!("{op}: need {dim} band indices ≥ 1")));
                }
                OperatorSpec::Kron { .. } | OperatorSpec::Nkp { .. } | OperatorSpec::TwoLevel { .. } if dim == 1 => {
                    return Err(Error::config(format!("{op} needs a multi-dimensional geometry")));
                }
                OperatorSpec::Nkp { rank } if *rank == 0 || (dim == 3 && *rank != 1) => {
                    return Err(Error::config(format!("{op}: unsupported rank")));
                }
                _ => {}
            }
        }
        if let Some(c) = &self.convergence {
            if c.meshes.len() < 3 || c.meshes.contains(&0) {
                return Err(Error::config("convergence needs at least three positive meshes"));
            }
        }
        if let Some(s) = &self.dynamics {
            if !(s.t_final > 0.0 && s.t_final.is_finite()) || !(s.safety > 0.0 && s.safety.is_finite()) {
                return Err(Error::config("t_final and safety must be positive"));
            }
            if s.samples == 0 {
                return Err(Error::config("samples must be positive"));
            }
        }
        if let Some(n) = &self.nkp {
            if n.rank == 0 || n.lumped.contains(&0) || n.scan.contains(&0) {
                return Err(Error::config("nkp rank, band indices and meshes must be positive"));
            }
        }
        Ok(())
    }
}

/// Parses one config object or an array of them.
pub fn parse(text: &str) -> Result<Vec<ExperimentConfig>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::config(format!("invalid JSON: {e}")))?;
    let items = match value {
        Value::Array(items) => items,
        v @ Value::Object(_) => vec![v],
        _ => return Err(Error::config("expected an object or an array of objects")),
    };
    if items.is_empty() {
        return Err(Error::config("empty experiment batch"));
    }
    items
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let cfg: ExperimentConfig =
                serde_json::from_value(v).map_err(|e| Error::config(format!("experiment {k}: {e}")))?;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

pub fn load(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}
