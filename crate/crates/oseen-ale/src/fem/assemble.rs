//! Element assembly of the velocity and pressure operators on a given
//! configuration of the moving mesh. Velocity basis functions are the
//! quadratic scalar basis times the coordinate unit vectors; pressure uses
//! the linear vertex basis.

use nalgebra::DVector;

use crate::error::{Result, SolverError};
use crate::fem::operator::AssembledOperator;
use crate::fem::quadrature::QuadratureRule;
use crate::fem::space::{p1_values, p2_gradients, p2_values, FunctionSpace, NODES_PER_CELL};

/// One mesh configuration: the function space plus the current vertex
/// positions (one entry per mesh vertex). `time` is carried for error
/// reporting only.
#[derive(Clone, Copy)]
pub struct Config<'a> {
    pub space: &'a FunctionSpace,
    pub positions: &'a [[f64; 2]],
    pub time: f64,
}

/// Scalar coefficient sampled per quadrature point: arguments are the cell
/// index, the barycentric coordinates, and the physical point.
pub type ScalarCoefficient<'a> = &'a dyn Fn(usize, [f64; 3], [f64; 2]) -> f64;
/// Vector coefficient with the same sampling arguments.
pub type VectorCoefficient<'a> = &'a dyn Fn(usize, [f64; 3], [f64; 2]) -> [f64; 2];

/// Which viscous bilinear form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ViscousForm {
    /// `int grad(u) : grad(v)`
    GradientGradient,
    /// `int 2 eps(u) : eps(v)` with the symmetric gradient `eps`
    SymmetricGradient,
}

impl<'a> Config<'a> {
    pub fn cell_vertices(&self, cell: usize) -> [[f64; 2]; 3] {
        let [v0, v1, v2] = self.space.mesh().cells()[cell];
        [self.positions[v0], self.positions[v1], self.positions[v2]]
    }

    /// Twice the signed cell area; errors on non-positive values.
    pub fn checked_det(&self, cell: usize) -> Result<f64> {
        let p = self.cell_vertices(cell);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if det <= 0.0 {
            return Err(SolverError::InvertedCell {
                cell,
                time: self.time,
                det,
            });
        }
        Ok(det)
    }

    pub fn physical_point(&self, cell: usize, bary: [f64; 3]) -> [f64; 2] {
        let p = self.cell_vertices(cell);
        [
            bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
            bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
        ]
    }
}

/// Vector mass matrix `int u . v` on the velocity space.
pub fn velocity_mass(cfg: Config, quad: &QuadratureRule) -> Result<AssembledOperator> {
    let n = cfg.space.num_velocity_dofs();
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let nodes = cfg.space.cell_nodes(cell);
        let mut local = [[0.0; NODES_PER_CELL]; NODES_PER_CELL];
        for (bary, w) in quad.points() {
            let phi = p2_values(bary);
            for i in 0..NODES_PER_CELL {
                for j in 0..NODES_PER_CELL {
                    local[i][j] += w * det * phi[i] * phi[j];
                }
            }
        }
        scatter_scalar_blocks(&mut triplets, &nodes, &local);
    }
    Ok(AssembledOperator::from_triplets(n, n, triplets))
}

/// Vector mass matrix with a scalar weight, `int c u . v`.
pub fn weighted_velocity_mass(
    cfg: Config,
    quad: &QuadratureRule,
    weight: ScalarCoefficient,
) -> Result<AssembledOperator> {
    let n = cfg.space.num_velocity_dofs();
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let nodes = cfg.space.cell_nodes(cell);
        let mut local = [[0.0; NODES_PER_CELL]; NODES_PER_CELL];
        for (bary, w) in quad.points() {
            let phi = p2_values(bary);
            let c = weight(cell, bary, cfg.physical_point(cell, bary));
            for i in 0..NODES_PER_CELL {
                for j in 0..NODES_PER_CELL {
                    local[i][j] += w * det * c * phi[i] * phi[j];
                }
            }
        }
        scatter_scalar_blocks(&mut triplets, &nodes, &local);
    }
    Ok(AssembledOperator::from_triplets(n, n, triplets))
}

/// Viscous matrix: `int grad(u) : grad(v)` or `int 2 eps(u) : eps(v)`.
pub fn velocity_diffusion(
    cfg: Config,
    quad: &QuadratureRule,
    form: ViscousForm,
) -> Result<AssembledOperator> {
    let n = cfg.space.num_velocity_dofs();
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let p = cfg.cell_vertices(cell);
        let nodes = cfg.space.cell_nodes(cell);
        for (bary, w) in quad.points() {
            let grads = p2_gradients(bary, p);
            for i in 0..NODES_PER_CELL {
                for j in 0..NODES_PER_CELL {
                    match form {
                        ViscousForm::GradientGradient => {
                            // block-diagonal: grad(phi_j e_c) : grad(phi_i e_c)
                            let gg = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                            for comp in 0..2 {
                                triplets.push((
                                    2 * nodes[i] + comp,
                                    2 * nodes[j] + comp,
                                    w * det * gg,
                                ));
                            }
                        }
                        ViscousForm::SymmetricGradient => {
                            // 2 eps(phi_j e_b) : eps(phi_i e_a)
                            //   = delta_ab grad(phi_i) . grad(phi_j)
                            //   + d_b phi_i d_a phi_j
                            let gg = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                            for a in 0..2 {
                                for b in 0..2 {
                                    let mut v = grads[i][b] * grads[j][a];
                                    if a == b {
                                        v += gg;
                                    }
                                    triplets.push((
                                        2 * nodes[i] + a,
                                        2 * nodes[j] + b,
                                        w * det * v,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(AssembledOperator::from_triplets(n, n, triplets))
}

/// Advective convection matrix `int ((a . grad) u) . v` for a given
/// advecting field `a`.
pub fn convection_advective(
    cfg: Config,
    quad: &QuadratureRule,
    advector: VectorCoefficient,
) -> Result<AssembledOperator> {
    let n = cfg.space.num_velocity_dofs();
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let p = cfg.cell_vertices(cell);
        let nodes = cfg.space.cell_nodes(cell);
        let mut local = [[0.0; NODES_PER_CELL]; NODES_PER_CELL];
        for (bary, w) in quad.points() {
            let phi = p2_values(bary);
            let grads = p2_gradients(bary, p);
            let a = advector(cell, bary, cfg.physical_point(cell, bary));
            for i in 0..NODES_PER_CELL {
                for j in 0..NODES_PER_CELL {
                    local[i][j] += w * det * (a[0] * grads[j][0] + a[1] * grads[j][1]) * phi[i];
                }
            }
        }
        scatter_scalar_blocks(&mut triplets, &nodes, &local);
    }
    Ok(AssembledOperator::from_triplets(n, n, triplets))
}

/// Pressure-velocity coupling `B_{q,i} = int q div(phi_i)`, one row per
/// pressure dof.
pub fn pressure_divergence(cfg: Config, quad: &QuadratureRule) -> Result<AssembledOperator> {
    let np = cfg.space.num_pressure_dofs();
    let nu = cfg.space.num_velocity_dofs();
    let mut triplets = Vec::new();
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let p = cfg.cell_vertices(cell);
        let verts = cfg.space.mesh().cells()[cell];
        let nodes = cfg.space.cell_nodes(cell);
        for (bary, w) in quad.points() {
            let q = p1_values(bary);
            let grads = p2_gradients(bary, p);
            for k in 0..3 {
                for i in 0..NODES_PER_CELL {
                    for comp in 0..2 {
                        triplets.push((
                            verts[k],
                            2 * nodes[i] + comp,
                            w * det * q[k] * grads[i][comp],
                        ));
                    }
                }
            }
        }
    }
    Ok(AssembledOperator::from_triplets(np, nu, triplets))
}

/// Load vector `F_i = int f . phi_i`.
pub fn load_vector(
    cfg: Config,
    quad: &QuadratureRule,
    f: VectorCoefficient,
) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(cfg.space.num_velocity_dofs());
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let nodes = cfg.space.cell_nodes(cell);
        for (bary, w) in quad.points() {
            let phi = p2_values(bary);
            let fv = f(cell, bary, cfg.physical_point(cell, bary));
            for i in 0..NODES_PER_CELL {
                out[2 * nodes[i]] += w * det * fv[0] * phi[i];
                out[2 * nodes[i] + 1] += w * det * fv[1] * phi[i];
            }
        }
    }
    Ok(out)
}

/// Integrals of the pressure basis functions, `m_q = int q`, used to impose
/// the zero-mean pressure constraint.
pub fn pressure_mean_vector(cfg: Config, quad: &QuadratureRule) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(cfg.space.num_pressure_dofs());
    for cell in 0..cfg.space.mesh().num_cells() {
        let det = cfg.checked_det(cell)?;
        let verts = cfg.space.mesh().cells()[cell];
        for (bary, w) in quad.points() {
            let q = p1_values(bary);
            for k in 0..3 {
                out[verts[k]] += w * det * q[k];
            }
        }
    }
    Ok(out)
}

/// Scatters a scalar 6x6 local matrix into both velocity components.
fn scatter_scalar_blocks(
    triplets: &mut Vec<(usize, usize, f64)>,
    nodes: &[usize; 6],
    local: &[[f64; NODES_PER_CELL]; NODES_PER_CELL],
) {
    for i in 0..NODES_PER_CELL {
        for j in 0..NODES_PER_CELL {
            let v = local[i][j];
            triplets.push((2 * nodes[i], 2 * nodes[j], v));
            triplets.push((2 * nodes[i] + 1, 2 * nodes[j] + 1, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_motion::ReferenceMesh;
    use std::sync::Arc;

    fn setup() -> (Arc<FunctionSpace>, Vec<[f64; 2]>) {
        let mesh = Arc::new(ReferenceMesh::unit_square(3, 3).unwrap());
        let positions = mesh.nodes().to_vec();
        let space = Arc::new(FunctionSpace::taylor_hood(mesh).unwrap());
        (space, positions)
    }

    fn nodal_velocity(space: &FunctionSpace, f: impl Fn([f64; 2]) -> [f64; 2]) -> DVector<f64> {
        let mut u = DVector::zeros(space.num_velocity_dofs());
        for n in 0..space.num_scalar_nodes() {
            let v = f(space.node_coords(n));
            u[2 * n] = v[0];
            u[2 * n + 1] = v[1];
        }
        u
    }

    #[test]
    fn mass_total_is_area_times_constant() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        let m = velocity_mass(cfg, &quad).unwrap();
        let ones = nodal_velocity(&space, |_| [1.0, 0.0]);
        // int 1 over the unit square
        assert!((m.quadratic_form(&ones, &ones) - 1.0).abs() < 1e-13);
        assert!(m.asymmetry() < 1e-14);
    }

    #[test]
    fn diffusion_energy_of_linear_field() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        let a = velocity_diffusion(cfg, &quad, ViscousForm::GradientGradient).unwrap();
        // u = (y, x): grad u has four entries 0,1,1,0 -> |grad u|^2 = 2
        let u = nodal_velocity(&space, |x| [x[1], x[0]]);
        assert!((a.quadratic_form(&u, &u) - 2.0).abs() < 1e-12);
        // same field: 2 eps(u) : eps(u) = 2 * (2 * 1/2 (1+1)^2 / 4 ... ) ->
        // eps(u) = [[0,1],[1,0]], 2|eps|^2 = 4
        let s = velocity_diffusion(cfg, &quad, ViscousForm::SymmetricGradient).unwrap();
        assert!((s.quadratic_form(&u, &u) - 4.0).abs() < 1e-12);
        // rigid rotation u = (-y, x): eps = 0, but |grad u|^2 = 2
        let r = nodal_velocity(&space, |x| [-x[1], x[0]]);
        assert!(s.quadratic_form(&r, &r).abs() < 1e-12);
        assert!((a.quadratic_form(&r, &r) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn convection_exact_for_polynomials() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        // a = (1, 0), u = (x^2, 0), v = (x, 0):
        // int_0^1 int_0^1 2x * x = 2/3
        let adv = |_: usize, _: [f64; 3], _: [f64; 2]| [1.0, 0.0];
        let c = convection_advective(cfg, &quad, &adv).unwrap();
        let u = nodal_velocity(&space, |x| [x[0] * x[0], 0.0]);
        let v = nodal_velocity(&space, |x| [x[0], 0.0]);
        assert!((c.quadratic_form(&v, &u) - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn divergence_pairs_with_linear_pressure() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        let b = pressure_divergence(cfg, &quad).unwrap();
        // u = (x, y): div u = 2; q = x -> int 2x over unit square = 1
        let u = nodal_velocity(&space, |x| [x[0], x[1]]);
        let mut q = DVector::zeros(space.num_pressure_dofs());
        for v in 0..space.num_pressure_dofs() {
            q[v] = space.mesh().nodes()[v][0];
        }
        assert!((q.dot(&b.matvec(&u)) - 1.0).abs() < 1e-13);
        // divergence-free field is annihilated for every pressure
        let w = nodal_velocity(&space, |x| [x[1], -x[0]]);
        let bw = b.matvec(&w);
        assert!(bw.amax() < 1e-13);
    }

    #[test]
    fn load_vector_integrates_constants() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        let f = |_: usize, _: [f64; 3], x: [f64; 2]| [x[0], 1.0];
        let fv = load_vector(cfg, &quad, &f).unwrap();
        let ones_x = nodal_velocity(&space, |_| [1.0, 0.0]);
        let ones_y = nodal_velocity(&space, |_| [0.0, 1.0]);
        assert!((fv.dot(&ones_x) - 0.5).abs() < 1e-13);
        assert!((fv.dot(&ones_y) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pressure_mean_sums_to_area() {
        let (space, positions) = setup();
        let cfg = Config {
            space: &space,
            positions: &positions,
            time: 0.0,
        };
        let quad = QuadratureRule::with_degree(4).unwrap();
        let m = pressure_mean_vector(cfg, &quad).unwrap();
        assert!((m.sum() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn inverted_configuration_rejected() {
        let (space, positions) = setup();
        let mut flipped = positions.clone();
        for p in flipped.iter_mut() {
            p[1] = -p[1];
        }
        let cfg = Config {
            space: &space,
            positions: &flipped,
            time: 0.5,
        };
        let quad = QuadratureRule::with_degree(2).unwrap();
        assert!(matches!(
            velocity_mass(cfg, &quad),
            Err(SolverError::InvertedCell { .. })
        ));
    }
}
