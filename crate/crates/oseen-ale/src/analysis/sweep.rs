//! The standard parameter sweep used by the stability certificates: four
//! motions crossed with two viscosities, two subgrid viscosities, and
//! forced/unforced data.

use std::sync::Arc;

use crate::analysis::certificates::{dt_admissible, DtCondition};
use crate::error::Result;
use crate::fem::FunctionSpace;
use crate::mesh_motion::{uniform_grid, DiscreteAleMap, MotionProgram, ReferenceMesh};
use crate::timestepper::{run_simulation, ProblemData, SchemeConfig, SchemeVariant, Trajectory};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepCase {
    pub motion: String,
    pub motion_params: Vec<f64>,
    pub mu: f64,
    pub mu_t: f64,
    pub forced: bool,
}

impl SweepCase {
    pub fn label(&self) -> String {
        format!(
            "{}-mu{}-mut{}-{}",
            self.motion,
            self.mu,
            self.mu_t,
            if self.forced { "forced" } else { "free" }
        )
    }
}

/// The 4 x 2 x 2 x 2 grid of standard cases.
pub fn standard_sweep() -> Vec<SweepCase> {
    let motions: [(&str, &[f64]); 4] = [
        ("stationary", &[]),
        ("translation", &[0.1, 0.0]),
        ("expansion", &[0.1]),
        ("shear", &[0.1]),
    ];
    let mut cases = Vec::with_capacity(32);
    for (motion, params) in motions {
        for mu in [0.1, 0.01] {
            for mu_t in [0.0, 0.01] {
                for forced in [false, true] {
                    cases.push(SweepCase {
                        motion: motion.to_string(),
                        motion_params: params.to_vec(),
                        mu,
                        mu_t,
                        forced,
                    });
                }
            }
        }
    }
    cases
}

/// Problem data for a sweep case: bubble initial state, zero boundary
/// values, steady divergence-free polynomial advector, optional steady
/// polynomial forcing. Polynomial data keeps the quadrature exact, so the
/// energy identities the certificates rest on hold to rounding.
pub fn case_problem(case: &SweepCase) -> ProblemData {
    let forced = case.forced;
    ProblemData {
        advecting: Box::new(|_, x| [x[1], x[0]]),
        advecting_divergence: Box::new(|_, _| 0.0),
        forcing: Box::new(move |_, x| {
            if forced {
                [x[1] * (1.0 - x[1]), -x[0]]
            } else {
                [0.0, 0.0]
            }
        }),
        dirichlet: Box::new(|_, _| [0.0, 0.0]),
        initial: Box::new(crate::analysis::manufactured::bubble_velocity),
    }
}

/// Runs one case over `n_steps` intervals of size `dt`.
pub fn run_case(
    case: &SweepCase,
    mesh: &Arc<ReferenceMesh>,
    space: &FunctionSpace,
    variant: SchemeVariant,
    dt: f64,
    n_steps: usize,
) -> Result<(DiscreteAleMap, Trajectory)> {
    let motion = Arc::new(MotionProgram::from_registry(
        &case.motion,
        &case.motion_params,
    )?);
    let map = DiscreteAleMap::build(mesh.clone(), motion, uniform_grid(0.0, dt, n_steps))?;
    let scheme = SchemeConfig {
        variant,
        mu: case.mu,
        mu_t: case.mu_t,
        ..SchemeConfig::default()
    };
    let problem = case_problem(case);
    let traj = run_simulation(&map, space, &scheme, &problem)?;
    Ok((map, traj))
}

/// Worst interval of the step-size condition over a whole run (the
/// advecting fields of the sweep are divergence-free).
pub fn worst_dt_condition(map: &DiscreteAleMap, c: f64) -> Result<DtCondition> {
    let div_free = |_: f64, _: [f64; 2]| 0.0;
    let mut worst: Option<DtCondition> = None;
    for n in 0..map.n_intervals() {
        let norms = map.mapping_norms(&div_free, n)?;
        let cond = dt_admissible(&norms, map.dt(), c);
        worst = Some(match worst {
            Some(prev) if prev.lhs >= cond.lhs => prev,
            _ => cond,
        });
    }
    Ok(worst.expect("map has at least one interval"))
}
