//! Projection-based subgrid viscosity: an extra diffusion acting only on
//! the part of the velocity gradient outside a coarse cellwise-constant
//! space. The coarse part is removed by elementwise L2 projection, so the
//! fine-scale term is `mu_T int (I - P) grad(u) : (I - P) grad(v)` and the
//! gradient energy splits orthogonally.

use nalgebra::DVector;

use crate::error::{Result, SolverError};
use crate::fem::{
    assemble::Config, eval_velocity_gradient, p2_gradients, AssembledOperator, QuadratureRule,
    NODES_PER_CELL,
};

/// Choice of coarse gradient space for the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoarseProjector {
    /// Cellwise-constant gradients; the projection is the per-cell mean.
    CellwiseConstant,
    /// Coarse space equals the full gradient space: the fine-scale part
    /// vanishes and the subgrid term is identically zero.
    FullGradient,
}

/// Per-cell mean of the gradient of each scalar basis function, the
/// ingredient of the projected fine-scale diffusion.
pub struct ProjectedGradients {
    /// `means[cell][local]` is the cell-average gradient of basis `local`.
    pub means: Vec<[[f64; 2]; NODES_PER_CELL]>,
    /// Twice the area of each cell.
    pub dets: Vec<f64>,
    pub projector: CoarseProjector,
}

/// Cell-average gradients of the quadratic basis on each cell of the
/// configuration.
pub fn build_projector(
    cfg: Config,
    quad: &QuadratureRule,
    projector: CoarseProjector,
) -> Result<ProjectedGradients> {
    let n_cells = cfg.space.mesh().num_cells();
    let mut means = Vec::with_capacity(n_cells);
    let mut dets = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let det = cfg.checked_det(cell)?;
        let p = cfg.cell_vertices(cell);
        let mut mean = [[0.0; 2]; NODES_PER_CELL];
        for (bary, w) in quad.points() {
            let grads = p2_gradients(bary, p);
            for i in 0..NODES_PER_CELL {
                // weights sum to 1/2, the reference area; w*det integrates
                // over the physical cell of area det/2
                mean[i][0] += w * grads[i][0] / 0.5;
                mean[i][1] += w * grads[i][1] / 0.5;
            }
        }
        means.push(mean);
        dets.push(det);
    }
    Ok(ProjectedGradients {
        means,
        dets,
        projector,
    })
}

/// Fine-scale diffusion matrix
/// `S_ij = mu_T int (I - P) grad(phi_j) : (I - P) grad(phi_i)`.
///
/// With the cellwise-constant projector this is the full gradient matrix
/// minus the rank-reduced mean-gradient correction per cell; with the full
/// projector it is zero.
pub fn assemble_fine_scale_diffusion(
    cfg: Config,
    quad: &QuadratureRule,
    proj: &ProjectedGradients,
    mu_t: f64,
) -> Result<AssembledOperator> {
    if mu_t < 0.0 {
        return Err(SolverError::NegativeViscosity(mu_t));
    }
    let n = cfg.space.num_velocity_dofs();
    if proj.projector == CoarseProjector::FullGradient || mu_t == 0.0 {
        return Ok(AssembledOperator::from_triplets(n, n, Vec::new()));
    }
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let p = cfg.cell_vertices(cell);
        let nodes = cfg.space.cell_nodes(cell);
        let mean = &proj.means[cell];
        let mut local = [[0.0; NODES_PER_CELL]; NODES_PER_CELL];
        for (bary, w) in quad.points() {
            let grads = p2_gradients(bary, p);
            for i in 0..NODES_PER_CELL {
                let fi = [grads[i][0] - mean[i][0], grads[i][1] - mean[i][1]];
                for j in 0..NODES_PER_CELL {
                    let fj = [grads[j][0] - mean[j][0], grads[j][1] - mean[j][1]];
                    local[i][j] += w * det * mu_t * (fi[0] * fj[0] + fi[1] * fj[1]);
                }
            }
        }
        for i in 0..NODES_PER_CELL {
            for j in 0..NODES_PER_CELL {
                triplets.push((2 * nodes[i], 2 * nodes[j], local[i][j]));
                triplets.push((2 * nodes[i] + 1, 2 * nodes[j] + 1, local[i][j]));
            }
        }
    }
    Ok(AssembledOperator::from_triplets(n, n, triplets))
}

/// Squared gradient energies of a velocity field split by the projector:
/// `(coarse, fine)` with `coarse + fine = int |grad u|^2`.
pub fn gradient_energy_split(
    cfg: Config,
    quad: &QuadratureRule,
    proj: &ProjectedGradients,
    coeffs: &DVector<f64>,
) -> Result<(f64, f64)> {
    let mut coarse = 0.0;
    let mut fine = 0.0;
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let nodes = cfg.space.cell_nodes(cell);
        // projected (cell-mean) gradient of the field
        let mut mean = [[0.0; 2]; 2];
        if proj.projector == CoarseProjector::CellwiseConstant {
            for i in 0..NODES_PER_CELL {
                for d in 0..2 {
                    mean[0][d] += coeffs[2 * nodes[i]] * proj.means[cell][i][d];
                    mean[1][d] += coeffs[2 * nodes[i] + 1] * proj.means[cell][i][d];
                }
            }
        }
        for (bary, w) in quad.points() {
            let g = eval_velocity_gradient(cfg, coeffs, cell, bary);
            let (pg, fg) = match proj.projector {
                CoarseProjector::FullGradient => (g, [[0.0; 2]; 2]),
                CoarseProjector::CellwiseConstant => {
                    let mut fg = [[0.0; 2]; 2];
                    for r in 0..2 {
                        for d in 0..2 {
                            fg[r][d] = g[r][d] - mean[r][d];
                        }
                    }
                    (mean, fg)
                }
            };
            for r in 0..2 {
                for d in 0..2 {
                    coarse += w * det * pg[r][d] * pg[r][d];
                    fine += w * det * fg[r][d] * fg[r][d];
                }
            }
        }
    }
    Ok((coarse, fine))
}
