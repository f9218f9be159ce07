//! Finite-element layer: quadrature, the Taylor-Hood space, operator
//! assembly on a moving configuration, and field evaluation and norms.

pub mod assemble;
pub mod field;
mod operator;
mod quadrature;
mod space;

pub use assemble::{Config, ScalarCoefficient, VectorCoefficient, ViscousForm};
pub use field::{eval_velocity, eval_velocity_gradient, field_norms, interpolate_velocity, FieldNorms};
pub use operator::AssembledOperator;
pub use quadrature::QuadratureRule;
pub use space::{p1_values, p2_gradients, p2_values, FunctionSpace, NODES_PER_CELL};
