//! Implicit-Euler finite-element solver for the linearized incompressible
//! Navier-Stokes (Oseen) equations on a moving two-dimensional domain, with
//! a projection-based subgrid viscosity. The `analysis` layer turns the
//! discrete energy estimates, the geometric conservation identity, and the
//! step-size admissibility condition into runnable checks.

pub mod analysis;
pub mod config;
pub mod error;
pub mod fem;
pub mod mesh_motion;
pub mod timestepper;
pub mod vms;

pub use error::{Result, SolverError};
