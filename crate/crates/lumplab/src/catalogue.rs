//! Registered experiments and geometry maps.

use lumplab_core::splinefem::{ControlNet, Density, End, EndConditions, GeometryMap, ProblemId};

use crate::config::{
    ConvergenceSettings, Discretization, DynamicsProblem, DynamicsSettings, ExperimentConfig, NkpSettings,
    OperatorSpec, Outputs,
};
use crate::error::{Error, Result};

pub const GEOMETRIES: &[&str] =
    &["unit_interval", "unit_square", "unit_cube", "quarter_annulus", "stretched_square", "reentrant_corner"];

const STRETCHED_SQUARE: &str = include_str!("../data/geometry/stretched_square.json");
const REENTRANT_CORNER: &str = include_str!("../data/geometry/reentrant_corner.json");

pub fn geometry(id: &str) -> Result<GeometryMap> {
    let net = |text: &str| -> Result<GeometryMap> {
        let net: ControlNet = serde_json::from_str(text).map_err(|e| Error::config(format!("control net `{id}`: {e}")))?;
        net.validate().map_err(|e| Error::config(format!("control net `{id}`: {e}")))?;
        Ok(GeometryMap::ControlNet(net))
    };
    match id {
        "unit_interval" => Ok(GeometryMap::UnitInterval),
        "unit_square" => Ok(GeometryMap::UnitSquare),
        "unit_cube" => Ok(GeometryMap::UnitCube),
        "quarter_annulus" => Ok(GeometryMap::QuarterAnnulus),
        "stretched_square" => net(STRETCHED_SQUARE),
        "reentrant_corner" => net(REENTRANT_CORNER),
        _ => Err(Error::config(format!("unknown geometry `{id}`"))),
    }
}

const IDS: &[&str] = &[
    "trivial_1x1",
    "row_sum_1d_p1_m100",
    "laplace_1d_p3_m400",
    "laplace_1d_p5_m400",
    "laplace_2d_p3_m20",
    "laplace_2d_p5_m20",
    "banded_vs_kron_2d_p3_m20",
    "accuracy_1d_p3",
    "accuracy_2d_p2",
    "elastodynamics_1d",
    "elastodynamics_2d",
    "elastodynamics_2d_safety085",
    "nkp_unit_square",
    "nkp_quarter_annulus",
    "nkp_appendix",
    "nkp_stretched_square",
    "nkp_reentrant_corner",
    "kron_unit_cube",
];

pub fn ids() -> &'static [&'static str] {
    IDS
}

fn disc(degree: usize, subdivisions: usize, geometry: &str) -> Discretization {
    Discretization {
        degree,
        subdivisions,
        geometry: geometry.into(),
        density: Density::Constant(1.0),
        ends: Vec::new(),
    }
}

fn base(id: &str, discretization: Discretization, operators: Vec<OperatorSpec>) -> ExperimentConfig {
    ExperimentConfig {
        id: id.into(),
        discretization,
        operators,
        convergence: None,
        dynamics: None,
        nkp: None,
        outputs: Outputs::default(),
        seed: 0,
    }
}

fn banded(is: &[usize]) -> Vec<OperatorSpec> {
    let mut ops = vec![OperatorSpec::Consistent];
    ops.extend(is.iter().map(|&i| OperatorSpec::Banded { i }));
    ops
}

fn kron_diag(is: &[usize], dim: usize) -> Vec<OperatorSpec> {
    let mut ops = vec![OperatorSpec::Consistent];
    ops.extend(is.iter().map(|&i| OperatorSpec::Kron { indices: vec![i; dim] }));
    ops
}

fn nkp(id: &str, degree: usize, m: usize, geometry: &str, density: Density, scan: Vec<usize>) -> ExperimentConfig {
    let mut d = disc(degree, m, geometry);
    d.density = density;
    let mut c = base(id, d, vec![OperatorSpec::Consistent, OperatorSpec::Nkp { rank: 1 }, OperatorSpec::TwoLevel { i: 1 }]);
    c.nkp = Some(NkpSettings { rank: 2, scan, lumped: vec![1, 2, 3] });
    c
}

pub fn preset(id: &str) -> Result<ExperimentConfig> {
    let mixed = EndConditions::new(End::Dirichlet, End::Natural);
    let cfg = match id {
        "trivial_1x1" => base(id, disc(1, 2, "unit_interval"), banded(&[1])),
        "row_sum_1d_p1_m100" => base(id, disc(1, 100, "unit_interval"), banded(&[1])),
        "laplace_1d_p3_m400" => base(id, disc(3, 400, "unit_interval"), banded(&[1, 2, 3])),
        "laplace_1d_p5_m400" => base(id, disc(5, 400, "unit_interval"), banded(&[1, 2, 3])),
        "laplace_2d_p3_m20" => base(id, disc(3, 20, "unit_square"), kron_diag(&[1, 2, 3], 2)),
        "laplace_2d_p5_m20" => base(id, disc(5, 20, "unit_square"), kron_diag(&[1, 2, 3], 2)),
        "banded_vs_kron_2d_p3_m20" => base(
            id,
            disc(3, 20, "unit_square"),
            vec![OperatorSpec::Consistent, OperatorSpec::Banded { i: 2 }, OperatorSpec::Kron { indices: vec![1, 2] }],
        ),
        "accuracy_1d_p3" => {
            let mut d = disc(3, 8, "unit_interval");
            d.ends = vec![mixed];
            let mut c = base(id, d, banded(&[1, 3]));
            c.convergence = Some(ConvergenceSettings { problem: ProblemId::Laplace1dMixed, meshes: vec![8, 16, 32, 64] });
            c
        }
        "accuracy_2d_p2" => {
            let mut d = disc(2, 4, "unit_square");
            d.ends = vec![mixed; 2];
            let mut c = base(id, d, kron_diag(&[1, 2], 2));
            c.convergence = Some(ConvergenceSettings { problem: ProblemId::Laplace2dMixed, meshes: vec![4, 8, 16] });
            c
        }
        "elastodynamics_1d" => {
            let mut c = base(id, disc(4, 50, "unit_interval"), banded(&[1, 2, 3]));
            c.dynamics = Some(DynamicsSettings {
                problem: DynamicsProblem::String1d,
                t_final: 6.0,
                safety: 0.85,
                samples: 60,
                dump_trajectory: false,
                shared_step: true,
            });
            c
        }
        "elastodynamics_2d" | "elastodynamics_2d_safety085" => {
            let mut c = base(id, disc(3, 20, "quarter_annulus"), kron_diag(&[1, 2, 3], 2));
            c.dynamics = Some(DynamicsSettings {
                problem: DynamicsProblem::QuarterAnnulus,
                t_final: 6.0,
                safety: if id == "elastodynamics_2d" { 1.0 } else { 0.85 },
                samples: 60,
                dump_trajectory: false,
                shared_step: false,
            });
            c
        }
        "nkp_unit_square" => nkp(id, 3, 10, "unit_square", Density::Constant(1.0), vec![]),
        "nkp_quarter_annulus" => nkp(id, 3, 10, "quarter_annulus", Density::Constant(1.0), vec![]),
        "nkp_appendix" => nkp(id, 3, 20, "unit_square", Density::SinProduct, vec![4, 8, 16, 32]),
        "nkp_stretched_square" => nkp(id, 3, 10, "stretched_square", Density::Constant(1.0), vec![4, 8, 16]),
        "nkp_reentrant_corner" => nkp(id, 3, 10, "reentrant_corner", Density::Constant(1.0), vec![4, 8, 16]),
        "kron_unit_cube" => base(id, disc(2, 6, "unit_cube"), kron_diag(&[1, 2], 3)),
        _ => return Err(Error::config(format!("unknown experiment id `{id}`"))),
    };
    Ok(cfg)
}

pub fn all() -> Vec<ExperimentConfig> {
    IDS.iter().map(|id| preset(id).expect("registered ids have presets")).collect()
}
