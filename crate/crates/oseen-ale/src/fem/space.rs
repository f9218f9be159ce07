//! Taylor-Hood function space on a triangulated reference mesh: continuous
//! piecewise-quadratic vector velocity and continuous piecewise-linear
//! pressure. Scalar quadratic nodes are the mesh vertices followed by the
//! edge midpoints; a velocity degree of freedom is `2 * node + component`.

use std::sync::Arc;

use crate::error::Result;
use crate::mesh_motion::ReferenceMesh;

/// Local node numbering on a cell: 0..3 the vertices, 3..6 the edge
/// midpoints opposite each vertex (3 on edge (1,2), 4 on (0,2), 5 on (0,1)).
pub const NODES_PER_CELL: usize = 6;

#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<ReferenceMesh>,
    /// Midpoint node positions, appended after the vertices.
    midpoint_coords: Vec<[f64; 2]>,
    /// Per cell, the 6 global scalar node indices in local order.
    cell_nodes: Vec<[usize; 6]>,
    /// Per scalar node, whether it lies on the boundary.
    node_on_boundary: Vec<bool>,
    /// Endpoints (vertex indices) of the edge owning each midpoint node.
    midpoint_edges: Vec<(usize, usize)>,
}

impl FunctionSpace {
    pub fn taylor_hood(mesh: Arc<ReferenceMesh>) -> Result<Self> {
        let edges = mesh.edges_with_adjacency();
        let nv = mesh.num_nodes();
        let mut edge_index = std::collections::HashMap::new();
        let mut midpoint_coords = Vec::with_capacity(edges.len());
        let mut midpoint_edges = Vec::with_capacity(edges.len());
        let mut node_on_boundary = mesh.boundary_markers().to_vec();
        for (i, &((a, b), count)) in edges.iter().enumerate() {
            edge_index.insert((a, b), nv + i);
            let pa = mesh.nodes()[a];
            let pb = mesh.nodes()[b];
            midpoint_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            midpoint_edges.push((a, b));
            node_on_boundary.push(count == 1);
        }
        let cell_nodes = mesh
            .cells()
            .iter()
            .map(|&[v0, v1, v2]| {
                let mid = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
                [v0, v1, v2, mid(v1, v2), mid(v0, v2), mid(v0, v1)]
            })
            .collect();
        Ok(Self {
            mesh,
            midpoint_coords,
            cell_nodes,
            node_on_boundary,
            midpoint_edges,
        })
    }

    pub fn mesh(&self) -> &Arc<ReferenceMesh> {
        &self.mesh
    }

    /// Scalar quadratic nodes: vertices then edge midpoints.
    pub fn num_scalar_nodes(&self) -> usize {
        self.mesh.num_nodes() + self.midpoint_coords.len()
    }

    /// Vector velocity degrees of freedom.
    pub fn num_velocity_dofs(&self) -> usize {
        2 * self.num_scalar_nodes()
    }

    /// Pressure degrees of freedom (one per vertex).
    pub fn num_pressure_dofs(&self) -> usize {
        self.mesh.num_nodes()
    }

    pub fn velocity_dof(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    pub fn cell_nodes(&self, cell: usize) -> [usize; 6] {
        self.cell_nodes[cell]
    }

    pub fn node_on_boundary(&self, node: usize) -> bool {
        self.node_on_boundary[node]
    }

    /// Reference coordinates of a scalar node.
    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let nv = self.mesh.num_nodes();
        if node < nv {
            self.mesh.nodes()[node]
        } else {
            self.midpoint_coords[node - nv]
        }
    }

    /// Current position of a scalar node under a nodal displacement of the
    /// mesh vertices: midpoint nodes track the midpoint of their edge (the
    /// cell map is affine).
    pub fn node_position(&self, node: usize, vertex_positions: &[[f64; 2]]) -> [f64; 2] {
        let nv = self.mesh.num_nodes();
        if node < nv {
            vertex_positions[node]
        } else {
            let (a, b) = self.midpoint_edges[node - nv];
            let pa = vertex_positions[a];
            let pb = vertex_positions[b];
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }
    }

    /// Boundary velocity dofs, ascending.
    pub fn boundary_velocity_dofs(&self) -> Vec<usize> {
        (0..self.num_scalar_nodes())
            .filter(|&n| self.node_on_boundary[n])
            .flat_map(|n| [2 * n, 2 * n + 1])
            .collect()
    }

    /// Interior (non-boundary) velocity dofs, ascending.
    pub fn interior_velocity_dofs(&self) -> Vec<usize> {
        (0..self.num_scalar_nodes())
            .filter(|&n| !self.node_on_boundary[n])
            .flat_map(|n| [2 * n, 2 * n + 1])
            .collect()
    }
}

/// Values of the 6 quadratic basis functions at barycentric `l`.
pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[0] * l[2],
        4.0 * l[0] * l[1],
    ]
}

/// Barycentric-gradient coefficients of the quadratic basis at `l`:
/// `grad phi_i = sum_k coeff[i][k] grad l_k`.
pub fn p2_bary_gradients(l: [f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
        [4.0 * l[1], 4.0 * l[0], 0.0],
    ]
}

/// Values of the 3 linear basis functions at barycentric `l` (identity).
pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

/// Physical gradients of the barycentric coordinates on a triangle with
/// vertices `p`: row `k` is `grad l_k`, constant over the cell.
pub fn barycentric_gradients(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    // grad l_k is the inward normal of the opposite edge scaled by 1/(2|K|)
    let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    [g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])]
}

/// Physical gradients of the 6 quadratic basis functions at barycentric `l`
/// on the triangle with vertices `p`.
pub fn p2_gradients(l: [f64; 3], p: [[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let gl = barycentric_gradients(p);
    let coeffs = p2_bary_gradients(l);
    let mut out = [[0.0; 2]; 6];
    for i in 0..6 {
        for k in 0..3 {
            out[i][0] += coeffs[i][k] * gl[k][0];
            out[i][1] += coeffs[i][k] * gl[k][1];
        }
    }
    out
}
