//! Implicit-Euler time stepping of the Oseen problem on the moving mesh.
//!
//! One step solves the saddle system
//! `M^{n+1} u + dt (2 mu A + S + C) u - dt B^T p = M^n u^n + dt F`,
//! `B u = 0`, with a scalar multiplier enforcing zero-mean pressure and
//! Dirichlet rows replaced. The `GclMidpoint` variant evaluates every
//! dt-weighted operator on the interval-midpoint configuration (and the
//! forcing at the midpoint time), which closes the discrete kinetic-energy
//! balance exactly; the `Endpoint` variant evaluates them at the end of the
//! interval.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};
use crate::fem::{
    assemble::{
        convection_advective, load_vector, pressure_divergence, pressure_mean_vector,
        velocity_diffusion, velocity_mass, weighted_velocity_mass, Config,
    },
    field_norms, interpolate_velocity, FunctionSpace, QuadratureRule, ViscousForm,
};
use crate::mesh_motion::DiscreteAleMap;
use crate::vms::{assemble_fine_scale_diffusion, build_projector, CoarseProjector};

/// Where the dt-weighted operators of the implicit step are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SchemeVariant {
    /// Interval-midpoint configuration; compatible with the geometric
    /// conservation identity.
    GclMidpoint,
    /// End-of-interval configuration.
    Endpoint,
}

impl std::fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeVariant::GclMidpoint => write!(f, "gcl-midpoint"),
            SchemeVariant::Endpoint => write!(f, "endpoint"),
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SchemeConfig {
    pub variant: SchemeVariant,
    /// Kinematic viscosity, must be positive.
    pub mu: f64,
    /// Subgrid viscosity, must be non-negative.
    pub mu_t: f64,
    pub projector: CoarseProjector,
    pub viscous_form: ViscousForm,
    /// Polynomial degree the triangle quadrature must integrate exactly.
    pub quadrature_degree: usize,
    /// Relative residual bound for the linear solve.
    pub solver_tolerance: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            variant: SchemeVariant::GclMidpoint,
            mu: 0.1,
            mu_t: 0.01,
            projector: CoarseProjector::CellwiseConstant,
            viscous_form: ViscousForm::GradientGradient,
            quadrature_degree: 4,
            solver_tolerance: 1e-9,
        }
    }
}

type SpaceTimeVector = dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync;
type SpaceTimeScalar = dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync;

/// Problem data in spatial (current-configuration) coordinates.
pub struct ProblemData {
    /// Advecting velocity profile of the linearized convection.
    pub advecting: Box<SpaceTimeVector>,
    /// Its spatial divergence (analytic, often zero).
    pub advecting_divergence: Box<SpaceTimeScalar>,
    pub forcing: Box<SpaceTimeVector>,
    /// Dirichlet boundary value; must match `initial` at the start time.
    pub dirichlet: Box<SpaceTimeVector>,
    pub initial: Box<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ProblemData { .. }")
    }
}

/// Per-step energy bookkeeping produced by the solver.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TimeStepReport {
    pub step: usize,
    pub time_end: f64,
    /// `|| u^{n+1} ||` on the end-of-interval configuration.
    pub u_l2_end: f64,
    /// Component-wise mixed norm of `u^{n+1}` on the same configuration.
    pub u_l12_end: f64,
    /// `|| u^n ||` on the start-of-interval configuration.
    pub u_l2_start: f64,
    /// `|| u^{n+1} - u^n ||` on the start-of-interval configuration.
    pub increment_l2_start: f64,
    /// `|| grad u^{n+1} ||` on the scheme's operator configuration.
    pub grad_l2_scheme: f64,
    /// Fine-scale part of the gradient norm on the same configuration.
    pub fine_grad_l2_scheme: f64,
    /// Dual (discrete H^{-1}) norm of the forcing at the scheme's forcing
    /// time and configuration.
    pub forcing_dual: f64,
    /// Relative residual of the linear solve.
    pub solver_residual: f64,
}

/// Full discrete solution of one run.
pub struct Trajectory {
    pub scheme: SchemeConfig,
    pub times: Vec<f64>,
    /// Velocity coefficients at each grid time (including the initial one).
    pub states: Vec<DVector<f64>>,
    /// Pressure coefficients at the end of each interval.
    pub pressures: Vec<DVector<f64>>,
    pub reports: Vec<TimeStepReport>,
}

/// Runs the scheme over every interval of the map's time grid.
pub fn run_simulation(
    map: &DiscreteAleMap,
    space: &FunctionSpace,
    scheme: &SchemeConfig,
    problem: &ProblemData,
) -> Result<Trajectory> {
    if scheme.mu <= 0.0 {
        return Err(SolverError::NegativeViscosity(scheme.mu));
    }
    if scheme.mu_t < 0.0 {
        return Err(SolverError::NegativeViscosity(scheme.mu_t));
    }
    let quad = QuadratureRule::with_degree(scheme.quadrature_degree)?;
    let mut states =
        vec![interpolate_velocity(space, map.grid_positions(0), &problem.initial)];
    let mut pressures = Vec::new();
    let mut reports = Vec::new();
    for n in 0..map.n_intervals() {
        let (u, p, report) = advance_one_step(map, space, scheme, problem, &quad, n, &states[n])?;
        states.push(u);
        pressures.push(p);
        reports.push(report);
    }
    Ok(Trajectory {
        scheme: *scheme,
        times: map.time_grid().to_vec(),
        states,
        pressures,
        reports,
    })
}

/// Advances the solution over interval `n`.
pub fn advance_one_step(
    map: &DiscreteAleMap,
    space: &FunctionSpace,
    scheme: &SchemeConfig,
    problem: &ProblemData,
    quad: &QuadratureRule,
    n: usize,
    u_old: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, TimeStepReport)> {
    let dt = map.dt();
    let t0 = map.time_grid()[n];
    let t1 = map.time_grid()[n + 1];
    let (t_op, op_positions): (f64, Vec<[f64; 2]>) = match scheme.variant {
        SchemeVariant::GclMidpoint => {
            let tm = t0 + 0.5 * dt;
            let pos = (0..map.mesh().num_nodes())
                .map(|k| map.node_position(tm, k))
                .collect();
            (tm, pos)
        }
        SchemeVariant::Endpoint => (t1, map.grid_positions(n + 1).to_vec()),
    };
    let cfg_start = Config {
        space,
        positions: map.grid_positions(n),
        time: t0,
    };
    let cfg_end = Config {
        space,
        positions: map.grid_positions(n + 1),
        time: t1,
    };
    let cfg_op = Config {
        space,
        positions: &op_positions,
        time: t_op,
    };

    let w = map.mesh_velocity(n)?;
    let advect = |cell: usize, bary: [f64; 3], x: [f64; 2]| {
        let [v0, v1, v2] = map.mesh().cells()[cell];
        let a = (problem.advecting)(t_op, x);
        [
            a[0] - (bary[0] * w.nodal_values[v0][0]
                + bary[1] * w.nodal_values[v1][0]
                + bary[2] * w.nodal_values[v2][0]),
            a[1] - (bary[0] * w.nodal_values[v0][1]
                + bary[1] * w.nodal_values[v1][1]
                + bary[2] * w.nodal_values[v2][1]),
        ]
    };
    let advect_div = |cell: usize, _bary: [f64; 3], x: [f64; 2]| {
        (problem.advecting_divergence)(t_op, x) - map.mesh_velocity_divergence(&w, cell, t_op)
    };

    let m_end = velocity_mass(cfg_end, quad)?;
    let m_start = velocity_mass(cfg_start, quad)?;
    let a_visc = velocity_diffusion(cfg_op, quad, scheme.viscous_form)?;
    let proj = build_projector(cfg_op, quad, scheme.projector)?;
    let s_fine = assemble_fine_scale_diffusion(cfg_op, quad, &proj, scheme.mu_t)?;
    let n_adv = convection_advective(cfg_op, quad, &advect)?;
    let w_div = weighted_velocity_mass(cfg_op, quad, &advect_div)?;
    let b_div = pressure_divergence(cfg_end, quad)?;
    let mean_p = pressure_mean_vector(cfg_end, quad)?;
    let forcing = |cell: usize, bary: [f64; 3], x: [f64; 2]| {
        let _ = (cell, bary);
        (problem.forcing)(t_op, x)
    };
    let f_vec = load_vector(cfg_op, quad, &forcing)?;

    // K = M^{n+1} + dt (2 mu A + S + N + W)
    let k_uu = m_end
        .add_scaled(2.0 * scheme.mu * dt, &a_visc)
        .add_scaled(dt, &s_fine)
        .add_scaled(dt, &n_adv)
        .add_scaled(dt, &w_div);

    let nu = space.num_velocity_dofs();
    let np = space.num_pressure_dofs();
    let dim = nu + np + 1;
    let mut sys = DMatrix::zeros(dim, dim);
    for r in 0..nu {
        for (c, v) in k_uu.row(r) {
            sys[(r, c)] = v;
        }
    }
    for r in 0..np {
        for (c, v) in b_div.row(r) {
            // momentum gets -dt B^T p, the constraint row is B u = 0
            sys[(c, nu + r)] = -dt * v;
            sys[(nu + r, c)] = v;
        }
    }
    for r in 0..np {
        sys[(nu + r, nu + np)] = mean_p[r];
        sys[(nu + np, nu + r)] = mean_p[r];
    }

    let mut rhs = DVector::zeros(dim);
    let m_u_old = m_start.matvec(u_old);
    for i in 0..nu {
        rhs[i] = m_u_old[i] + dt * f_vec[i];
    }

    // Dirichlet rows: identity with the boundary value at t^{n+1} on the
    // end-of-interval configuration
    for node in 0..space.num_scalar_nodes() {
        if !space.node_on_boundary(node) {
            continue;
        }
        let x = space.node_position(node, map.grid_positions(n + 1));
        let g = (problem.dirichlet)(t1, x);
        for comp in 0..2 {
            let dof = 2 * node + comp;
            for c in 0..dim {
                sys[(dof, c)] = 0.0;
            }
            sys[(dof, dof)] = 1.0;
            rhs[dof] = g[comp];
        }
    }

    let rhs_norm = rhs.norm();
    let lu = sys.clone().lu();
    let sol = lu.solve(&rhs).ok_or(SolverError::SolverFailure {
        residual: f64::INFINITY,
        tolerance: scheme.solver_tolerance,
    })?;
    let residual = (&sys * &sol - &rhs).norm() / rhs_norm.max(f64::MIN_POSITIVE);
    if residual > scheme.solver_tolerance {
        return Err(SolverError::SolverFailure {
            residual,
            tolerance: scheme.solver_tolerance,
        });
    }

    let u_new = DVector::from_iterator(nu, (0..nu).map(|i| sol[i]));
    let p_new = DVector::from_iterator(np, (0..np).map(|i| sol[nu + i]));

    let norms_end = field_norms(cfg_end, quad, &u_new)?;
    let norms_start_old = field_norms(cfg_start, quad, u_old)?;
    let increment = &u_new - u_old;
    let norms_start_inc = field_norms(cfg_start, quad, &increment)?;
    let (_, fine_sq) = crate::vms::gradient_energy_split(cfg_op, quad, &proj, &u_new)?;
    let grad_scheme = field_norms(cfg_op, quad, &u_new)?.h1_semi;
    let forcing_dual = dual_norm(cfg_op, quad, space, &f_vec)?;

    let report = TimeStepReport {
        step: n,
        time_end: t1,
        u_l2_end: norms_end.l2,
        u_l12_end: norms_end.l12,
        u_l2_start: norms_start_old.l2,
        increment_l2_start: norms_start_inc.l2,
        grad_l2_scheme: grad_scheme,
        fine_grad_l2_scheme: fine_sq.sqrt(),
        forcing_dual,
        solver_residual: residual,
    };
    Ok((u_new, p_new, report))
}

/// Discrete dual norm of a velocity functional on the interior dofs:
/// `sqrt( F^T (A + M)^{-1} F )` with the stiffness-plus-mass inner product,
/// a mesh-level stand-in for the H^{-1} norm of the forcing.
pub fn dual_norm(
    cfg: Config,
    quad: &QuadratureRule,
    space: &FunctionSpace,
    f_vec: &DVector<f64>,
) -> Result<f64> {
    let interior = space.interior_velocity_dofs();
    if interior.is_empty() {
        return Ok(0.0);
    }
    let a = velocity_diffusion(cfg, quad, ViscousForm::GradientGradient)?;
    let m = velocity_mass(cfg, quad)?;
    let riesz = a.add_scaled(1.0, &m).to_dense();
    let k = interior.len();
    let mut sub = DMatrix::zeros(k, k);
    let mut fi = DVector::zeros(k);
    for (ii, &i) in interior.iter().enumerate() {
        fi[ii] = f_vec[i];
        for (jj, &j) in interior.iter().enumerate() {
            sub[(ii, jj)] = riesz[(i, j)];
        }
    }
    let chol = sub.cholesky().ok_or_else(|| {
        SolverError::InvalidMesh("dual-norm Gram matrix not positive definite".into())
    })?;
    let z = chol.solve(&fi);
    Ok(fi.dot(&z).max(0.0).sqrt())
}
