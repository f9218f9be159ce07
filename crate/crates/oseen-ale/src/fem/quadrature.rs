//! Symmetric quadrature rules on the reference triangle
//! {(x, y) : x, y >= 0, x + y <= 1}, stored in barycentric coordinates.
//! Weights sum to the triangle area 1/2.

use crate::error::{Result, SolverError};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    degree: usize,
    /// `(barycentric coordinates, weight)` pairs.
    points: Vec<([f64; 3], f64)>,
}

impl QuadratureRule {
    /// Smallest tabulated rule exact for polynomials of total degree
    /// `degree`. Available up to degree 6.
    pub fn with_degree(degree: usize) -> Result<Self> {
        let points = match degree {
            0 | 1 => vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.5)],
            2 => {
                let w = 1.0 / 6.0;
                vec![
                    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], w),
                    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], w),
                    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], w),
                ]
            }
            3 | 4 => {
                let mut pts = Vec::with_capacity(6);
                push_orbit3(&mut pts, 0.108103018168070, 0.5 * 0.223381589678011);
                push_orbit3(&mut pts, 0.816847572980459, 0.5 * 0.109951743655322);
                pts
            }
            5 => {
                let mut pts = vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.5 * 0.225)];
                push_orbit3(&mut pts, 0.059715871789770, 0.5 * 0.132394152788506);
                push_orbit3(&mut pts, 0.797426985353087, 0.5 * 0.125939180544827);
                pts
            }
            6 => {
                let mut pts = Vec::with_capacity(12);
                push_orbit3(&mut pts, 0.501426509658179, 0.5 * 0.116786275726379);
                push_orbit3(&mut pts, 0.873821971016996, 0.5 * 0.050844906370207);
                push_orbit6(
                    &mut pts,
                    0.053145049844816,
                    0.310352451033785,
                    0.5 * 0.082851075618374,
                );
                pts
            }
            d => {
                return Err(SolverError::Config(format!(
                    "no triangle quadrature rule tabulated for degree {d}"
                )))
            }
        };
        Ok(Self { degree, points })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Three-point symmetric orbit: one barycentric coordinate `a`, the other
/// two `(1 - a)/2`.
fn push_orbit3(pts: &mut Vec<([f64; 3], f64)>, a: f64, w: f64) {
    let b = 0.5 * (1.0 - a);
    pts.push(([a, b, b], w));
    pts.push(([b, a, b], w));
    pts.push(([b, b, a], w));
}

/// Six-point orbit: all permutations of `(a, b, 1 - a - b)`.
fn push_orbit6(pts: &mut Vec<([f64; 3], f64)>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        pts.push((p, w));
    }
}
