//! Temporal convergence harness: runs the endpoint scheme on a halving
//! step-size sequence against a reference run at `dt_min / 16` on the same
//! spatial mesh, so the spatial discretization error cancels in the
//! comparison and the observed rate isolates the time discretization.

use std::sync::Arc;

use crate::error::{Result, SolverError};
use crate::fem::{field_norms, Config, FunctionSpace, QuadratureRule};
use crate::mesh_motion::{uniform_grid, DiscreteAleMap, MotionProgram, ReferenceMesh};
use crate::timestepper::{run_simulation, ProblemData, SchemeConfig, SchemeVariant, Trajectory};

/// Errors below this are reported as noise, not turned into rates.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// L2 norm of the difference to the reference at the final time, on
    /// the final configuration.
    pub error_l2_final: f64,
    /// `sqrt( dt sum_i || grad(u - u_ref)(t_i) ||^2 )` over the run's grid.
    pub error_h1_summed: f64,
    /// `log2` ratio of the previous row's L2 error to this one; absent for
    /// the first row and whenever either error sits below the noise floor.
    pub rate: Option<f64>,
    pub below_floor: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rate between the two finest step sizes, if measurable.
    pub fn finest_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt,error_l2,error_h1_summed,rate\n");
        for r in &self.rows {
            let rate = match (r.below_floor, r.rate) {
                (true, _) => "below-floor".to_string(),
                (false, None) => "na".to_string(),
                (false, Some(v)) => format!("{v:.17e}"),
            };
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{rate}\n",
                r.dt, r.error_l2_final, r.error_h1_summed
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("dt,error_l2,error_h1_summed,rate") => {}
            _ => return Err(SolverError::Config("unrecognized convergence CSV".into())),
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(SolverError::Config("convergence CSV needs 4 columns".into()));
            }
            let f = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| SolverError::Config(format!("bad float '{s}': {e}")))
            };
            let (rate, below_floor) = match cols[3] {
                "below-floor" => (None, true),
                "na" => (None, false),
                v => (Some(f(v)?), false),
            };
            rows.push(ConvergenceRow {
                dt: f(cols[0])?,
                error_l2_final: f(cols[1])?,
                error_h1_summed: f(cols[2])?,
                rate,
                below_floor,
            });
        }
        Ok(Self { rows })
    }
}

pub struct ConvergenceSetup<'a> {
    pub mesh: Arc<ReferenceMesh>,
    pub motion: Arc<MotionProgram>,
    pub problem: &'a ProblemData,
    pub scheme: SchemeConfig,
    pub t_final: f64,
}

fn run_with_dt(
    setup: &ConvergenceSetup,
    space: &FunctionSpace,
    dt: f64,
) -> Result<(DiscreteAleMap, Trajectory)> {
    let n_steps = (setup.t_final / dt).round() as usize;
    if ((n_steps as f64) * dt - setup.t_final).abs() > 1e-9 * setup.t_final {
        return Err(SolverError::Config(format!(
            "dt {dt} does not divide the final time {}",
            setup.t_final
        )));
    }
    let map = DiscreteAleMap::build(
        setup.mesh.clone(),
        setup.motion.clone(),
        uniform_grid(0.0, dt, n_steps),
    )?;
    let scheme = SchemeConfig {
        variant: SchemeVariant::Endpoint,
        ..setup.scheme
    };
    let traj = run_simulation(&map, space, &scheme, setup.problem)?;
    Ok((map, traj))
}

/// Runs the halving sequence and measures each run against the reference.
pub fn temporal_convergence(setup: &ConvergenceSetup, dts: &[f64]) -> Result<ConvergenceTable> {
    if dts.len() < 3 {
        return Err(SolverError::Config(
            "temporal convergence needs at least 3 step sizes".into(),
        ));
    }
    for w in dts.windows(2) {
        if (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0] {
            return Err(SolverError::Config(
                "step sizes must halve between consecutive entries".into(),
            ));
        }
    }
    let space = FunctionSpace::taylor_hood(setup.mesh.clone())?;
    let quad = QuadratureRule::with_degree(setup.scheme.quadrature_degree)?;
    let dt_ref = dts.last().unwrap() / 16.0;
    let (ref_map, ref_traj) = run_with_dt(setup, &space, dt_ref)?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dts.len());
    for &dt in dts {
        let (map, traj) = run_with_dt(setup, &space, dt)?;
        let stride = (dt / dt_ref).round() as usize;
        let n_steps = map.n_intervals();

        let mut h1_sq_sum = 0.0;
        let mut l2_final = 0.0;
        for k in 1..=n_steps {
            let diff = &traj.states[k] - &ref_traj.states[k * stride];
            let cfg = Config {
                space: &space,
                positions: map.grid_positions(k),
                time: map.time_grid()[k],
            };
            let norms = field_norms(cfg, &quad, &diff)?;
            h1_sq_sum += norms.h1_semi.powi(2);
            if k == n_steps {
                l2_final = norms.l2;
            }
        }
        let error_h1_summed = (dt * h1_sq_sum).sqrt();
        let below_floor = l2_final < NOISE_FLOOR;
        let rate = match rows.last() {
            Some(prev) if !below_floor && !prev.below_floor => {
                Some((prev.error_l2_final / l2_final).log2())
            }
            _ => None,
        };
        rows.push(ConvergenceRow {
            dt,
            error_l2_final: l2_final,
            error_h1_summed,
            rate,
            below_floor,
        });
        let _ = &ref_map;
    }
    Ok(ConvergenceTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::manufactured::problem_from_registry;

    #[test]
    fn csv_round_trip() {
        let table = ConvergenceTable {
            rows: vec![
                ConvergenceRow {
                    dt: 0.1,
                    error_l2_final: 1e-2,
                    error_h1_summed: 3e-2,
                    rate: None,
                    below_floor: false,
                },
                ConvergenceRow {
                    dt: 0.05,
                    error_l2_final: 5.1e-3,
                    error_h1_summed: 1.6e-2,
                    rate: Some(0.97),
                    below_floor: false,
                },
                ConvergenceRow {
                    dt: 0.025,
                    error_l2_final: 1e-12,
                    error_h1_summed: 1e-12,
                    rate: None,
                    below_floor: true,
                },
            ],
        };
        let parsed = ConvergenceTable::from_csv(&table.to_csv()).unwrap();
        assert_eq!(parsed, table);
    }

    #[test]
    fn validation_rejects_short_or_nonhalving_sequences() {
        let mesh = Arc::new(ReferenceMesh::unit_square(2, 2).unwrap());
        let motion = Arc::new(MotionProgram::from_registry("stationary", &[]).unwrap());
        let problem = problem_from_registry("zero", 0.1).unwrap();
        let setup = ConvergenceSetup {
            mesh,
            motion,
            problem: &problem,
            scheme: SchemeConfig::default(),
            t_final: 0.4,
        };
        assert!(temporal_convergence(&setup, &[0.1, 0.05]).is_err());
        assert!(temporal_convergence(&setup, &[0.1, 0.05, 0.03]).is_err());
    }

    #[test]
    fn steady_zero_problem_sits_below_the_noise_floor() {
        let mesh = Arc::new(ReferenceMesh::unit_square(2, 2).unwrap());
        let motion = Arc::new(MotionProgram::from_registry("stationary", &[]).unwrap());
        let problem = problem_from_registry("zero", 0.1).unwrap();
        let setup = ConvergenceSetup {
            mesh,
            motion,
            problem: &problem,
            scheme: SchemeConfig::default(),
            t_final: 0.4,
        };
        let table = temporal_convergence(&setup, &[0.1, 0.05, 0.025]).unwrap();
        assert!(table.rows.iter().all(|r| r.below_floor));
        assert!(table.finest_rate().is_none());
    }
}
