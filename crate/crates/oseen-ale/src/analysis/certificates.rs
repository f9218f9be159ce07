//! Numerical stability certificates: per-step energy ledgers assembled from
//! a trajectory, the two global energy estimates, and the step-size
//! admissibility condition for the endpoint scheme.

use crate::error::{Result, SolverError};
use crate::mesh_motion::MappingNorms;
use crate::timestepper::{SchemeVariant, Trajectory};

/// Per-step energy bookkeeping rows, one per interval, plus the initial
/// kinetic energy.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct EnergyLedger {
    pub dt: f64,
    pub initial_kinetic_sq: f64,
    pub rows: Vec<LedgerRow>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct LedgerRow {
    pub step: usize,
    pub time: f64,
    /// `|| u^{i+1} ||^2` on the end-of-interval configuration.
    pub kinetic_sq: f64,
    /// `|| grad u^{i+1} ||^2` at the scheme's configuration.
    pub viscous_sq: f64,
    /// Fine-scale gradient energy at the same configuration.
    pub fine_sq: f64,
    /// Dual norm of the forcing at the scheme's forcing time.
    pub load_dual: f64,
    pub cumulative_viscous_sq: f64,
    pub cumulative_fine_sq: f64,
    pub cumulative_load: f64,
}

impl EnergyLedger {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let dt = traj.times[1] - traj.times[0];
        let initial = traj.reports.first().map_or(0.0, |r| r.u_l2_start.powi(2));
        let mut cum_v = 0.0;
        let mut cum_f = 0.0;
        let mut cum_l = 0.0;
        let rows = traj
            .reports
            .iter()
            .map(|r| {
                cum_v += r.grad_l2_scheme.powi(2);
                cum_f += r.fine_grad_l2_scheme.powi(2);
                cum_l += r.forcing_dual;
                LedgerRow {
                    step: r.step,
                    time: r.time_end,
                    kinetic_sq: r.u_l2_end.powi(2),
                    viscous_sq: r.grad_l2_scheme.powi(2),
                    fine_sq: r.fine_grad_l2_scheme.powi(2),
                    load_dual: r.forcing_dual,
                    cumulative_viscous_sq: cum_v,
                    cumulative_fine_sq: cum_f,
                    cumulative_load: cum_l,
                }
            })
            .collect();
        Self {
            dt,
            initial_kinetic_sq: initial,
            rows,
        }
    }

    /// CSV with a header row; floats printed with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "step,time,kinetic_sq,viscous_sq,fine_sq,load_dual,cumulative_viscous_sq,cumulative_fine_sq,cumulative_load\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.step,
                r.time,
                r.kinetic_sq,
                r.viscous_sq,
                r.fine_sq,
                r.load_dual,
                r.cumulative_viscous_sq,
                r.cumulative_fine_sq,
                r.cumulative_load
            ));
        }
        out
    }

    /// Parses rows written by `to_csv` (dt and the initial energy are not
    /// part of the CSV; pass them through).
    pub fn rows_from_csv(text: &str) -> Result<Vec<LedgerRow>> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SolverError::Config("empty ledger CSV".into()))?;
        if !header.starts_with("step,time,") {
            return Err(SolverError::Config("unrecognized ledger CSV header".into()));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(SolverError::Config(format!(
                    "ledger CSV line {} has {} columns, expected 9",
                    k + 2,
                    cols.len()
                )));
            }
            let f = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| SolverError::Config(format!("bad float '{s}': {e}")))
            };
            rows.push(LedgerRow {
                step: cols[0]
                    .parse()
                    .map_err(|e| SolverError::Config(format!("bad step: {e}")))?,
                time: f(cols[1])?,
                kinetic_sq: f(cols[2])?,
                viscous_sq: f(cols[3])?,
                fine_sq: f(cols[4])?,
                load_dual: f(cols[5])?,
                cumulative_viscous_sq: f(cols[6])?,
                cumulative_fine_sq: f(cols[7])?,
                cumulative_load: f(cols[8])?,
            });
        }
        Ok(rows)
    }
}

/// Outcome of one global energy estimate.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct StabilityCertificate {
    pub variant: SchemeVariant,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// The constant used on the right side (`C_Omega` or `C'`).
    pub constant: f64,
    pub holds: bool,
}

fn certificate(variant: SchemeVariant, lhs: f64, rhs: f64, constant: f64) -> StabilityCertificate {
    let slack = rhs - lhs;
    StabilityCertificate {
        variant,
        lhs,
        rhs,
        slack,
        constant,
        holds: slack >= -1e-10 * rhs.max(1.0),
    }
}

/// Energy estimate of the midpoint (geometry-conserving) scheme:
/// `||u^N||^2 + dt sum (3 mu ||grad u||^2 + mu_T ||fine||^2)
///   <= ||u^0||^2 + dt (1 + C_Omega)/mu sum ||f||_dual^2`.
pub fn certify_gcl_stability(traj: &Trajectory, c_omega: f64) -> Result<StabilityCertificate> {
    if traj.scheme.variant != SchemeVariant::GclMidpoint {
        return Err(SolverError::WrongVariant {
            expected: SchemeVariant::GclMidpoint,
            found: traj.scheme.variant,
        });
    }
    let ledger = EnergyLedger::from_trajectory(traj);
    let (mu, mu_t) = (traj.scheme.mu, traj.scheme.mu_t);
    let final_kinetic = ledger.rows.last().map_or(0.0, |r| r.kinetic_sq);
    let dissipation: f64 = ledger
        .rows
        .iter()
        .map(|r| 3.0 * mu * r.viscous_sq + mu_t * r.fine_sq)
        .sum();
    let load: f64 = ledger.rows.iter().map(|r| r.load_dual.powi(2)).sum();
    let lhs = final_kinetic + ledger.dt * dissipation;
    let rhs = ledger.initial_kinetic_sq + ledger.dt * (1.0 + c_omega) / mu * load;
    Ok(certificate(SchemeVariant::GclMidpoint, lhs, rhs, c_omega))
}

/// Energy estimate of the endpoint scheme, valid only under the step-size
/// condition; the constant `C'` is calibrated, not derived:
/// `||u^N||^2 + dt sum (2 mu ||grad u||^2 + mu_T ||fine||^2)
///   <= C' (||u^0||^2 + sum ||f||_dual)`.
pub fn certify_nogcl_stability(
    traj: &Trajectory,
    c_prime: f64,
    condition: &DtCondition,
) -> Result<StabilityCertificate> {
    if traj.scheme.variant != SchemeVariant::Endpoint {
        return Err(SolverError::WrongVariant {
            expected: SchemeVariant::Endpoint,
            found: traj.scheme.variant,
        });
    }
    if !condition.admissible {
        return Err(SolverError::ConditionViolated {
            lhs: condition.lhs,
        });
    }
    let ledger = EnergyLedger::from_trajectory(traj);
    let (mu, mu_t) = (traj.scheme.mu, traj.scheme.mu_t);
    let final_kinetic = ledger.rows.last().map_or(0.0, |r| r.kinetic_sq);
    let dissipation: f64 = ledger
        .rows
        .iter()
        .map(|r| 2.0 * mu * r.viscous_sq + mu_t * r.fine_sq)
        .sum();
    let load: f64 = ledger.rows.iter().map(|r| r.load_dual).sum();
    let lhs = final_kinetic + ledger.dt * dissipation;
    let rhs = c_prime * (ledger.initial_kinetic_sq + load);
    Ok(certificate(SchemeVariant::Endpoint, lhs, rhs, c_prime))
}

/// Largest `lhs / rhs` ratio of the endpoint estimate over a set of
/// trajectories, with `C' = 1`; calibration picks `1.5x` this value.
pub fn endpoint_energy_ratio(traj: &Trajectory) -> f64 {
    let ledger = EnergyLedger::from_trajectory(traj);
    let (mu, mu_t) = (traj.scheme.mu, traj.scheme.mu_t);
    let final_kinetic = ledger.rows.last().map_or(0.0, |r| r.kinetic_sq);
    let dissipation: f64 = ledger
        .rows
        .iter()
        .map(|r| 2.0 * mu * r.viscous_sq + mu_t * r.fine_sq)
        .sum();
    let load: f64 = ledger.rows.iter().map(|r| r.load_dual).sum();
    let lhs = final_kinetic + ledger.dt * dissipation;
    let rhs = ledger.initial_kinetic_sq + load;
    if rhs <= 0.0 {
        if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

/// Evaluation of the step-size admissibility condition.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DtCondition {
    pub lhs: f64,
    pub bound: f64,
    pub admissible: bool,
    pub norms: MappingNorms,
    pub constant: f64,
    pub dt: f64,
}

/// `C dt^2 |grad_ref w| |grad map| |div w| - dt/2 |div u*| <= 1/2`.
pub fn dt_admissible(norms: &MappingNorms, dt: f64, c: f64) -> DtCondition {
    let lhs = c * dt * dt * norms.sup_grad_w_hat * norms.sup_grad_map * norms.sup_div_w
        - 0.5 * dt * norms.sup_div_ustar;
    DtCondition {
        lhs,
        bound: 0.5,
        admissible: lhs <= 0.5,
        norms: *norms,
        constant: c,
        dt,
    }
}

/// `int_0^dt s^k ds = dt^{k+1} / (k+1)`.
pub fn time_moment(k: u32, dt: f64) -> f64 {
    dt.powi(k as i32 + 1) / (k as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_motion::MappingNorms;

    #[test]
    fn time_moment_values() {
        assert_eq!(time_moment(2, 1.0), 1.0 / 3.0);
        assert_eq!(time_moment(0, 0.7), 0.7);
        assert_eq!(time_moment(1, 0.5), 0.125);
    }

    #[test]
    fn dt_condition_cases() {
        let zero = MappingNorms {
            sup_grad_w_hat: 0.0,
            sup_grad_map: 1.0,
            sup_div_w: 0.0,
            sup_div_ustar: 0.0,
        };
        // stationary or rigid translation: lhs = 0 for every dt
        for dt in [0.01, 1.0, 100.0] {
            let cond = dt_admissible(&zero, dt, 1.0);
            assert_eq!(cond.lhs, 0.0);
            assert!(cond.admissible);
        }
        // expansion-type norms: admissible up to moderate dt, not for huge C
        let exp = MappingNorms {
            sup_grad_w_hat: 0.1,
            sup_grad_map: 1.1,
            sup_div_w: 0.2,
            sup_div_ustar: 0.0,
        };
        let cond = dt_admissible(&exp, 1.0, 1.0);
        assert!((cond.lhs - 0.022).abs() < 1e-15);
        assert!(cond.admissible);
        let cond = dt_admissible(&exp, 10.0, 100.0);
        assert!(!cond.admissible);
    }

    #[test]
    fn ledger_csv_round_trip() {
        let rows = vec![LedgerRow {
            step: 0,
            time: 0.1,
            kinetic_sq: 1.0 / 3.0,
            viscous_sq: 2.0_f64.sqrt(),
            fine_sq: 1e-17,
            load_dual: 0.0,
            cumulative_viscous_sq: 2.0_f64.sqrt(),
            cumulative_fine_sq: 1e-17,
            cumulative_load: 0.0,
        }];
        let ledger = EnergyLedger {
            dt: 0.1,
            initial_kinetic_sq: 1.0,
            rows: rows.clone(),
        };
        let parsed = EnergyLedger::rows_from_csv(&ledger.to_csv()).unwrap();
        assert_eq!(parsed, rows);
    }
}
