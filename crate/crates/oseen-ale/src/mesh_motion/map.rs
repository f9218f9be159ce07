//! Time-discrete ALE mapping: nodal positions on a uniform time grid with
//! linear-in-time interpolation, per-cell deformation gradients, and the
//! derived piecewise-constant mesh velocity.

use std::sync::Arc;

use nalgebra::Matrix2;

use crate::error::{Result, SolverError};
use crate::mesh_motion::{MotionProgram, ReferenceMesh};

/// Quadrature rules in time over one interval `[t^n, t^{n+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum TimeQuadrature {
    /// Single point at the interval midpoint.
    Midpoint,
    /// Single point at the left endpoint.
    LeftEndpoint,
    /// 5-point Gauss-Legendre, exact to polynomial degree 9.
    Gauss5,
}

impl TimeQuadrature {
    /// Nodes and weights on the unit interval [0, 1].
    pub fn nodes_weights(self) -> Vec<(f64, f64)> {
        match self {
            TimeQuadrature::Midpoint => vec![(0.5, 1.0)],
            TimeQuadrature::LeftEndpoint => vec![(0.0, 1.0)],
            TimeQuadrature::Gauss5 => {
                // Gauss-Legendre on [-1,1], mapped to [0,1].
                let xs = [
                    -0.906179845938663992797627,
                    -0.538469310105683091036314,
                    0.0,
                    0.538469310105683091036314,
                    0.906179845938663992797627,
                ];
                let ws = [
                    0.236926885056189087514264,
                    0.478628670499366468041292,
                    0.568888888888888888888889,
                    0.478628670499366468041292,
                    0.236926885056189087514264,
                ];
                xs.iter()
                    .zip(ws.iter())
                    .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
                    .collect()
            }
        }
    }
}

/// Piecewise-constant-in-time mesh velocity on one interval.
#[derive(Debug, Clone)]
pub struct MeshVelocityField {
    pub interval_index: usize,
    /// Per-node velocity, `(positions[n+1] - positions[n]) / dt`.
    pub nodal_values: Vec<[f64; 2]>,
}

/// Sup norms of the mapping quantities entering the time-step admissibility
/// condition. Matrix sup norm convention: maximum absolute row sum.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MappingNorms {
    pub sup_grad_w_hat: f64,
    pub sup_grad_map: f64,
    pub sup_div_w: f64,
    pub sup_div_ustar: f64,
}

/// Nodal domain positions at the discrete times of a uniform grid, linearly
/// interpolated in between. Immutable after construction.
pub struct DiscreteAleMap {
    mesh: Arc<ReferenceMesh>,
    motion: Arc<MotionProgram>,
    time_grid: Vec<f64>,
    dt: f64,
    /// `positions[n][k]` = position of node `k` at time `time_grid[n]`.
    positions: Vec<Vec<[f64; 2]>>,
}

impl DiscreteAleMap {
    /// Samples the motion at the grid times and validates bijectivity:
    /// positive per-cell Jacobian determinants at every grid time and every
    /// interval midpoint (the determinant is quadratic in time per interval,
    /// so these are the candidate minima for the interpolated configurations).
    pub fn build(
        mesh: Arc<ReferenceMesh>,
        motion: Arc<MotionProgram>,
        time_grid: Vec<f64>,
    ) -> Result<Self> {
        if time_grid.len() < 2 {
            return Err(SolverError::InvalidMotion(
                "time grid needs at least two points".into(),
            ));
        }
        let dt = time_grid[1] - time_grid[0];
        if dt <= 0.0 {
            return Err(SolverError::InvalidMotion(
                "time grid must be strictly increasing".into(),
            ));
        }
        for w in time_grid.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-12 * dt.max(1.0) {
                return Err(SolverError::InvalidMotion("time grid must be uniform".into()));
            }
        }
        let positions: Vec<Vec<[f64; 2]>> = time_grid
            .iter()
            .map(|&t| mesh.nodes().iter().map(|&y| motion.displacement(t, y)).collect())
            .collect();
        for (k, (&p, &y)) in positions[0].iter().zip(mesh.nodes().iter()).enumerate() {
            if (p[0] - y[0]).abs() > 1e-12 || (p[1] - y[1]).abs() > 1e-12 {
                return Err(SolverError::InvalidMotion(format!(
                    "motion '{}' does not start at the identity (node {k})",
                    motion.name()
                )));
            }
        }
        let map = Self {
            mesh,
            motion,
            time_grid,
            dt,
            positions,
        };
        for n in 0..map.n_intervals() + 1 {
            map.check_not_inverted(map.time_grid[n])?;
        }
        for n in 0..map.n_intervals() {
            map.check_not_inverted(map.time_grid[n] + 0.5 * map.dt)?;
        }
        Ok(map)
    }

    fn check_not_inverted(&self, tau: f64) -> Result<()> {
        for cell in 0..self.mesh.num_cells() {
            let det = self.jacobian_determinant(tau, cell);
            if det <= 0.0 {
                return Err(SolverError::InvertedCell {
                    cell,
                    time: tau,
                    det,
                });
            }
        }
        Ok(())
    }

    pub fn mesh(&self) -> &Arc<ReferenceMesh> {
        &self.mesh
    }

    pub fn motion(&self) -> &Arc<MotionProgram> {
        &self.motion
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_intervals(&self) -> usize {
        self.time_grid.len() - 1
    }

    pub fn grid_positions(&self, n: usize) -> &[[f64; 2]] {
        &self.positions[n]
    }

    /// Interval index containing `tau` (the last interval for `tau = T`).
    pub fn interval_of(&self, tau: f64) -> usize {
        let t0 = self.time_grid[0];
        let n = ((tau - t0) / self.dt).floor() as isize;
        (n.max(0) as usize).min(self.n_intervals() - 1)
    }

    /// Position of node `k` at the interpolated configuration at `tau`
    /// (convex combination of the bracketing grid configurations).
    pub fn node_position(&self, tau: f64, k: usize) -> [f64; 2] {
        let n = self.interval_of(tau);
        let theta = (tau - self.time_grid[n]) / self.dt;
        let a = self.positions[n][k];
        let b = self.positions[n + 1][k];
        [
            (1.0 - theta) * a[0] + theta * b[0],
            (1.0 - theta) * a[1] + theta * b[1],
        ]
    }

    /// Geometry matrix of a cell at configuration `tau`: columns are the two
    /// edge vectors out of the first vertex.
    pub fn cell_matrix(&self, tau: f64, cell: usize) -> Matrix2<f64> {
        let [v0, v1, v2] = self.mesh.cells()[cell];
        let p0 = self.node_position(tau, v0);
        let p1 = self.node_position(tau, v1);
        let p2 = self.node_position(tau, v2);
        Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1])
    }

    /// Geometry matrix of a cell on the reference configuration.
    pub fn cell_matrix_ref(&self, cell: usize) -> Matrix2<f64> {
        let [v0, v1, v2] = self.mesh.cells()[cell];
        let p0 = self.mesh.nodes()[v0];
        let p1 = self.mesh.nodes()[v1];
        let p2 = self.mesh.nodes()[v2];
        Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1])
    }

    /// Deformation gradient of the cell-affine map reference -> current
    /// configuration at `tau`; linear in `tau` within each interval.
    pub fn deformation_gradient(&self, tau: f64, cell: usize) -> Matrix2<f64> {
        let j_cur = self.cell_matrix(tau, cell);
        let j_ref = self.cell_matrix_ref(cell);
        j_cur * j_ref.try_inverse().expect("reference cell is non-degenerate")
    }

    /// Determinant of the reference-to-current affine cell map at `tau`.
    /// Quadratic polynomial in `tau` within each interval; may be <= 0 for an
    /// inverted configuration (callers treat that as an error).
    pub fn jacobian_determinant(&self, tau: f64, cell: usize) -> f64 {
        self.deformation_gradient(tau, cell).determinant()
    }

    /// Mesh velocity on interval `n`, nodewise difference quotient of the
    /// bracketing configurations. Constant in time on `(t^n, t^{n+1}]`.
    pub fn mesh_velocity(&self, n: usize) -> Result<MeshVelocityField> {
        if n >= self.n_intervals() {
            return Err(SolverError::IndexOutOfRange {
                index: n,
                len: self.n_intervals(),
            });
        }
        let nodal_values = self.positions[n]
            .iter()
            .zip(self.positions[n + 1].iter())
            .map(|(a, b)| [(b[0] - a[0]) / self.dt, (b[1] - a[1]) / self.dt])
            .collect();
        Ok(MeshVelocityField {
            interval_index: n,
            nodal_values,
        })
    }

    /// Reference-frame gradient of the interval-`n` mesh velocity on one cell
    /// (constant per cell since the velocity is vertex-linear).
    pub fn velocity_gradient_ref(&self, w: &MeshVelocityField, cell: usize) -> Matrix2<f64> {
        let [v0, v1, v2] = self.mesh.cells()[cell];
        let w0 = w.nodal_values[v0];
        let w1 = w.nodal_values[v1];
        let w2 = w.nodal_values[v2];
        let dw = Matrix2::new(w1[0] - w0[0], w2[0] - w0[0], w1[1] - w0[1], w2[1] - w0[1]);
        let j_ref = self.cell_matrix_ref(cell);
        dw * j_ref.try_inverse().expect("reference cell is non-degenerate")
    }

    /// Spatial divergence of the mesh velocity on `cell` at configuration
    /// `tau` within interval `n`: `tr(G F(tau)^{-1})`, constant in space per
    /// cell.
    pub fn mesh_velocity_divergence(
        &self,
        w: &MeshVelocityField,
        cell: usize,
        tau: f64,
    ) -> f64 {
        let g = self.velocity_gradient_ref(w, cell);
        let f = self.deformation_gradient(tau, cell);
        let finv = f.try_inverse().expect("non-inverted configuration");
        (g * finv).trace()
    }

    /// Reynolds-transport residual on interval `n` for a scalar field
    /// transported from the reference configuration:
    /// `| (I(t^{n+1}) - I(t^n)) / dt  -  (1/dt) \int \int phi (div w_h) |`,
    /// divided by `max(1, |lhs|)`.
    ///
    /// The right side is integrated with 5-point Gauss quadrature in time
    /// over the configurations of the exact motion, with the interval's
    /// discrete mesh velocity. For motions linear in time both sides agree to
    /// machine precision; for smooth nonlinear motions the defect is the
    /// first-order mesh-velocity sampling error.
    pub fn transport_residual(&self, phi: &dyn Fn([f64; 2]) -> f64, n: usize) -> Result<f64> {
        if n >= self.n_intervals() {
            return Err(SolverError::IndexOutOfRange {
                index: n,
                len: self.n_intervals(),
            });
        }
        let w = self.mesh_velocity(n)?;
        let quad = crate::fem::QuadratureRule::with_degree(6)?;

        // integral of phi over the exact configuration at time t
        let integral_exact = |t: f64| -> f64 {
            let mut total = 0.0;
            for (cell_idx, cell) in self.mesh.cells().iter().enumerate() {
                let det_ref = self.cell_matrix_ref(cell_idx).determinant();
                let f = self.exact_deformation_gradient(t, cell_idx);
                let det = f.determinant() * det_ref;
                for (bary, wq) in quad.points() {
                    let y = self.bary_to_ref(cell, bary);
                    total += wq * phi(y) * det / det_ref;
                }
            }
            total
        };

        let t0 = self.time_grid[n];
        let t1 = self.time_grid[n + 1];
        let lhs = (integral_exact(t1) - integral_exact(t0)) / self.dt;

        let mut rhs = 0.0;
        for (s, ws) in TimeQuadrature::Gauss5.nodes_weights() {
            let t = t0 + s * self.dt;
            for (cell_idx, cell) in self.mesh.cells().iter().enumerate() {
                let f_ex = self.exact_deformation_gradient(t, cell_idx);
                let det_ex = f_ex.determinant();
                let g = self.velocity_gradient_ref(&w, cell_idx);
                let div_w = (g * f_ex.try_inverse().expect("bijective")).trace();
                let mut cell_int = 0.0;
                for (bary, wq) in quad.points() {
                    let y = self.bary_to_ref(cell, bary);
                    cell_int += wq * phi(y);
                }
                rhs += ws * cell_int * div_w * det_ex;
            }
        }
        Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
    }

    /// Deformation gradient of the exact (analytic) motion on one cell at
    /// time `t`, built from the exactly-moved vertices.
    fn exact_deformation_gradient(&self, t: f64, cell: usize) -> Matrix2<f64> {
        let [v0, v1, v2] = self.mesh.cells()[cell];
        let p0 = self.motion.displacement(t, self.mesh.nodes()[v0]);
        let p1 = self.motion.displacement(t, self.mesh.nodes()[v1]);
        let p2 = self.motion.displacement(t, self.mesh.nodes()[v2]);
        let j_cur = Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
        let j_ref = self.cell_matrix_ref(cell);
        j_cur * j_ref.try_inverse().expect("reference cell is non-degenerate")
    }

    fn bary_to_ref(&self, cell: &[usize; 3], bary: [f64; 3]) -> [f64; 2] {
        let p0 = self.mesh.nodes()[cell[0]];
        let p1 = self.mesh.nodes()[cell[1]];
        let p2 = self.mesh.nodes()[cell[2]];
        [
            bary[0] * p0[0] + bary[1] * p1[0] + bary[2] * p2[0],
            bary[0] * p0[1] + bary[1] * p1[1] + bary[2] * p2[1],
        ]
    }

    /// Sup norms over interval `n` of the quantities entering the time-step
    /// admissibility condition. Gradients are constant per cell; the
    /// divergence of the given advecting field is sampled at the quadrature
    /// points and vertices of every cell on the end-of-interval configuration.
    pub fn mapping_norms(
        &self,
        ustar_divergence: &dyn Fn(f64, [f64; 2]) -> f64,
        n: usize,
    ) -> Result<MappingNorms> {
        if n >= self.n_intervals() {
            return Err(SolverError::IndexOutOfRange {
                index: n,
                len: self.n_intervals(),
            });
        }
        let w = self.mesh_velocity(n)?;
        let t_end = self.time_grid[n + 1];
        let t_start = self.time_grid[n];

        let mut sup_grad_w_hat: f64 = 0.0;
        let mut sup_grad_map: f64 = 0.0;
        let mut sup_div_w: f64 = 0.0;
        for cell in 0..self.mesh.num_cells() {
            let g = self.velocity_gradient_ref(&w, cell);
            sup_grad_w_hat = sup_grad_w_hat.max(max_row_sum(&g));
            // F is linear in tau and the norm convex, so endpoints suffice.
            sup_grad_map = sup_grad_map
                .max(max_row_sum(&self.deformation_gradient(t_start, cell)))
                .max(max_row_sum(&self.deformation_gradient(t_end, cell)));
            sup_div_w = sup_div_w.max(self.mesh_velocity_divergence(&w, cell, t_end).abs());
        }

        let quad = crate::fem::QuadratureRule::with_degree(4)?;
        let mut sup_div_ustar: f64 = 0.0;
        for (cell_idx, cell) in self.mesh.cells().iter().enumerate() {
            let mut sample = |x: [f64; 2]| {
                sup_div_ustar = sup_div_ustar.max(ustar_divergence(t_end, x).abs());
            };
            for &v in cell {
                sample(self.node_position(t_end, v));
            }
            for (bary, _) in quad.points() {
                let p0 = self.node_position(t_end, cell[0]);
                let p1 = self.node_position(t_end, cell[1]);
                let p2 = self.node_position(t_end, cell[2]);
                sample([
                    bary[0] * p0[0] + bary[1] * p1[0] + bary[2] * p2[0],
                    bary[0] * p0[1] + bary[1] * p1[1] + bary[2] * p2[1],
                ]);
            }
            let _ = cell_idx;
        }

        Ok(MappingNorms {
            sup_grad_w_hat,
            sup_grad_map,
            sup_div_w,
            sup_div_ustar,
        })
    }
}

fn max_row_sum(m: &Matrix2<f64>) -> f64 {
    let r0 = m[(0, 0)].abs() + m[(0, 1)].abs();
    let r1 = m[(1, 0)].abs() + m[(1, 1)].abs();
    r0.max(r1)
}

impl std::fmt::Debug for DiscreteAleMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteAleMap")
            .field("motion", &self.motion.name())
            .field("steps", &self.n_intervals())
            .field("dt", &self.dt)
            .finish()
    }
}

/// Uniform time grid with `n_steps` intervals on `[t0, t0 + n_steps*dt]`.
pub fn uniform_grid(t0: f64, dt: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|i| t0 + i as f64 * dt).collect()
}
