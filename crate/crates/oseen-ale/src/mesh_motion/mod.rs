//! Moving-domain machinery: the fixed reference triangulation, analytic
//! motion programs, the time-discrete mapping with its mesh velocity, and
//! the geometric conservation check.

mod gcl;
mod map;
mod mesh;
mod motion;

pub use gcl::gcl_residual;
pub use map::{uniform_grid, DiscreteAleMap, MappingNorms, MeshVelocityField, TimeQuadrature};
pub use mesh::ReferenceMesh;
pub use motion::MotionProgram;
