//! Discrete geometric conservation check: the change of the mass matrix
//! across one interval must equal the space-time integral of the basis
//! product weighted by the divergence of the mesh velocity.

use crate::error::Result;
use crate::fem::{
    assemble::{velocity_mass, weighted_velocity_mass, Config},
    FunctionSpace, QuadratureRule,
};
use crate::mesh_motion::{DiscreteAleMap, TimeQuadrature};

/// Relative sup-norm defect of the mass-matrix balance on interval `n`:
/// `max_ij | M^{n+1}_ij - M^n_ij - Q_ij | / max_ij |M_ij|`, where `Q` is the
/// time-quadrature approximation of
/// `int_{t^n}^{t^{n+1}} int phi_i . phi_j div(w_h)`.
///
/// On affine triangles the integrand is quadratic in time, so the midpoint
/// rule (and 5-point Gauss) reproduce the balance to rounding while the
/// left-endpoint rule does not.
pub fn gcl_residual(
    map: &DiscreteAleMap,
    space: &FunctionSpace,
    n: usize,
    rule: TimeQuadrature,
) -> Result<f64> {
    let quad = QuadratureRule::with_degree(4)?;
    let t0 = map.time_grid()[n];
    let dt = map.dt();
    let w = map.mesh_velocity(n)?;

    fn cfg_at<'a>(space: &'a FunctionSpace, positions: &'a [[f64; 2]], time: f64) -> Config<'a> {
        Config {
            space,
            positions,
            time,
        }
    }
    let m0 = velocity_mass(cfg_at(space, map.grid_positions(n), t0), &quad)?;
    let m1 = velocity_mass(cfg_at(space, map.grid_positions(n + 1), t0 + dt), &quad)?;

    let mut q = None;
    for (s, ws) in rule.nodes_weights() {
        let tau = t0 + s * dt;
        let positions: Vec<[f64; 2]> = (0..map.mesh().num_nodes())
            .map(|k| map.node_position(tau, k))
            .collect();
        let div_w = |cell: usize, _: [f64; 3], _: [f64; 2]| {
            map.mesh_velocity_divergence(&w, cell, tau)
        };
        let part = weighted_velocity_mass(cfg_at(space, &positions, tau), &quad, &div_w)?;
        q = Some(match q {
            None => part.to_dense() * (ws * dt),
            Some(acc) => acc + part.to_dense() * (ws * dt),
        });
    }
    let q = q.expect("time rule has at least one node");

    let m0d = m0.to_dense();
    let m1d = m1.to_dense();
    let scale = m0d
        .iter()
        .chain(m1d.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    let defect = (&m1d - &m0d - &q)
        .iter()
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    Ok(defect / scale.max(f64::MIN_POSITIVE))
}
