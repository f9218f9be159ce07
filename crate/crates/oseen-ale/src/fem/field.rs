//! Coefficient-vector fields on the velocity space, nodal interpolation,
//! and integral norms evaluated on a configuration.

use nalgebra::DVector;

use crate::error::Result;
use crate::fem::assemble::Config;
use crate::fem::quadrature::QuadratureRule;
use crate::fem::space::{p2_gradients, p2_values, FunctionSpace, NODES_PER_CELL};

/// Norms of a velocity field on one configuration.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct FieldNorms {
    /// `( int |u|^2 )^{1/2}`
    pub l2: f64,
    /// `( int |grad u|^2 )^{1/2}` (Frobenius)
    pub h1_semi: f64,
    /// `sum_c ( int |u_c|^2 )^{1/2}`, the component-wise mixed norm
    pub l12: f64,
}

/// Nodal interpolant of an analytic velocity profile at the current node
/// positions (vertices from `positions`, midpoints on the deformed edges).
pub fn interpolate_velocity(
    space: &FunctionSpace,
    positions: &[[f64; 2]],
    f: &dyn Fn([f64; 2]) -> [f64; 2],
) -> DVector<f64> {
    let mut u = DVector::zeros(space.num_velocity_dofs());
    for n in 0..space.num_scalar_nodes() {
        let v = f(space.node_position(n, positions));
        u[2 * n] = v[0];
        u[2 * n + 1] = v[1];
    }
    u
}

/// Velocity value at a barycentric point of a cell.
pub fn eval_velocity(
    space: &FunctionSpace,
    coeffs: &DVector<f64>,
    cell: usize,
    bary: [f64; 3],
) -> [f64; 2] {
    let phi = p2_values(bary);
    let nodes = space.cell_nodes(cell);
    let mut v = [0.0, 0.0];
    for i in 0..NODES_PER_CELL {
        v[0] += coeffs[2 * nodes[i]] * phi[i];
        v[1] += coeffs[2 * nodes[i] + 1] * phi[i];
    }
    v
}

/// Velocity gradient (rows are components) at a barycentric point.
pub fn eval_velocity_gradient(
    cfg: Config,
    coeffs: &DVector<f64>,
    cell: usize,
    bary: [f64; 3],
) -> [[f64; 2]; 2] {
    let grads = p2_gradients(bary, cfg.cell_vertices(cell));
    let nodes = cfg.space.cell_nodes(cell);
    let mut g = [[0.0; 2]; 2];
    for i in 0..NODES_PER_CELL {
        for d in 0..2 {
            g[0][d] += coeffs[2 * nodes[i]] * grads[i][d];
            g[1][d] += coeffs[2 * nodes[i] + 1] * grads[i][d];
        }
    }
    g
}

/// Integral norms of the field on the given configuration.
pub fn field_norms(cfg: Config, quad: &QuadratureRule, coeffs: &DVector<f64>) -> Result<FieldNorms> {
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    let mut comp_sq = [0.0, 0.0];
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        for (bary, w) in quad.points() {
            let v = eval_velocity(cfg.space, coeffs, cell, bary);
            let g = eval_velocity_gradient(cfg, coeffs, cell, bary);
            l2_sq += w * det * (v[0] * v[0] + v[1] * v[1]);
            comp_sq[0] += w * det * v[0] * v[0];
            comp_sq[1] += w * det * v[1] * v[1];
            for row in g {
                h1_sq += w * det * (row[0] * row[0] + row[1] * row[1]);
            }
        }
    }
    Ok(FieldNorms {
        l2: l2_sq.sqrt(),
        h1_semi: h1_sq.sqrt(),
        l12: comp_sq[0].sqrt() + comp_sq[1].sqrt(),
    })
}
