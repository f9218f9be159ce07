//! Executable forms of the solver's theory: the discrete Gronwall lemma,
//! energy-stability certificates for both schemes, the step-size
//! admissibility condition, the manufactured benchmark problems, and the
//! temporal convergence harness.

pub mod certificates;
pub mod convergence;
pub mod gronwall;
pub mod manufactured;
pub mod sweep;

pub use certificates::{
    certify_gcl_stability, certify_nogcl_stability, dt_admissible, endpoint_energy_ratio,
    time_moment, DtCondition, EnergyLedger, LedgerRow, StabilityCertificate,
};
pub use convergence::{
    temporal_convergence, ConvergenceRow, ConvergenceSetup, ConvergenceTable, NOISE_FLOOR,
};
pub use gronwall::{gronwall_envelope, GronwallEnvelope, GronwallInstance};
pub use manufactured::{
    bubble_velocity, exact_pressure, exact_velocity, exact_velocity_gradient,
    manufactured_forcing, manufactured_problem, problem_from_registry,
};
pub use sweep::{case_problem, run_case, standard_sweep, worst_dt_condition, SweepCase};
