//! Reference triangulation of the undeformed domain.

use std::collections::HashMap;

use crate::error::{Result, SolverError};

/// Triangulation of the reference configuration. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ReferenceMesh {
    nodes: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    boundary_markers: Vec<bool>,
}

impl ReferenceMesh {
    /// Builds a mesh from raw data, validating the structural invariants:
    /// positive signed cell areas, node indices in range, and every
    /// boundary edge adjacent to exactly one cell.
    pub fn new(nodes: Vec<[f64; 2]>, cells: Vec<[usize; 3]>) -> Result<Self> {
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                if v >= nodes.len() {
                    return Err(SolverError::InvalidMesh(format!(
                        "cell {c} references node {v}, mesh has {} nodes",
                        nodes.len()
                    )));
                }
            }
            let area = signed_area(&nodes[cell[0]], &nodes[cell[1]], &nodes[cell[2]]);
            if area <= 0.0 {
                return Err(SolverError::InvalidMesh(format!(
                    "cell {c} has non-positive signed area {area}"
                )));
            }
        }

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &cells {
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                let key = ordered(cell[a], cell[b]);
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary_markers = vec![false; nodes.len()];
        for (&(a, b), &count) in &edge_count {
            if count > 2 {
                return Err(SolverError::InvalidMesh(format!(
                    "edge ({a},{b}) shared by {count} cells"
                )));
            }
            if count == 1 {
                boundary_markers[a] = true;
                boundary_markers[b] = true;
            }
        }

        Ok(Self {
            nodes,
            cells,
            boundary_markers,
        })
    }

    /// Structured triangulation of the unit square: `(nx+1) x (ny+1)` nodes in
    /// row-major order, each grid square split into two right triangles,
    /// `2*nx*ny` cells total. Deterministic ordering.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(SolverError::InvalidMesh("need nx, ny >= 1".into()));
        }
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(nodes, cells)
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.boundary_markers[node]
    }

    pub fn boundary_markers(&self) -> &[bool] {
        &self.boundary_markers
    }

    /// Unique edges as ordered vertex pairs together with the number of
    /// adjacent cells, sorted for deterministic iteration.
    pub fn edges_with_adjacency(&self) -> Vec<((usize, usize), usize)> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &self.cells {
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                *edge_count.entry(ordered(cell[a], cell[b])).or_insert(0) += 1;
            }
        }
        let mut edges: Vec<_> = edge_count.into_iter().collect();
        edges.sort_unstable_by_key(|&(e, _)| e);
        edges
    }
}

pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(p0: &[f64; 2], p1: &[f64; 2], p2: &[f64; 2]) -> f64 {
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}
