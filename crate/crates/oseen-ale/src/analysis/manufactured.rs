//! Closed-form benchmark problems, including the manufactured moving-domain
//! solution used by the temporal convergence study: a divergence-free
//! stream-function velocity with a known pressure, and the forcing obtained
//! by substituting both into the linearized momentum operator
//! `f = d/dt u - 2 mu lap(u) + (u* . grad) u + grad p`.

use std::f64::consts::PI;

use crate::error::{Result, SolverError};
use crate::timestepper::ProblemData;

fn growth(t: f64) -> f64 {
    1.0 + 0.5 * t
}

/// Exact velocity: curl of `sin^2(pi x1) sin^2(pi x2) (1 + t/2)`.
pub fn exact_velocity(t: f64, x: [f64; 2]) -> [f64; 2] {
    let g = growth(t);
    let s1 = (PI * x[0]).sin();
    let s2 = (PI * x[1]).sin();
    [
        PI * g * s1 * s1 * (2.0 * PI * x[1]).sin(),
        -PI * g * (2.0 * PI * x[0]).sin() * s2 * s2,
    ]
}

/// Exact pressure `sin(2 pi x1) cos(2 pi x2) t`; zero mean on the unit
/// square at every time.
pub fn exact_pressure(t: f64, x: [f64; 2]) -> f64 {
    (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() * t
}

/// Velocity gradient of the exact solution, rows are components.
pub fn exact_velocity_gradient(t: f64, x: [f64; 2]) -> [[f64; 2]; 2] {
    let g = growth(t);
    let s1 = (PI * x[0]).sin();
    let s2 = (PI * x[1]).sin();
    let s21 = (2.0 * PI * x[0]).sin();
    let s22 = (2.0 * PI * x[1]).sin();
    let c21 = (2.0 * PI * x[0]).cos();
    let c22 = (2.0 * PI * x[1]).cos();
    [
        [
            PI * PI * g * s21 * s22,
            2.0 * PI * PI * g * s1 * s1 * c22,
        ],
        [
            -2.0 * PI * PI * g * c21 * s2 * s2,
            -PI * PI * g * s21 * s22,
        ],
    ]
}

fn laplacian(t: f64, x: [f64; 2]) -> [f64; 2] {
    let g = growth(t);
    let s1 = (PI * x[0]).sin();
    let s2 = (PI * x[1]).sin();
    let s21 = (2.0 * PI * x[0]).sin();
    let s22 = (2.0 * PI * x[1]).sin();
    let c21 = (2.0 * PI * x[0]).cos();
    let c22 = (2.0 * PI * x[1]).cos();
    let pi2 = PI * PI;
    [
        PI * g * (2.0 * pi2 * c21 * s22 - 4.0 * pi2 * s1 * s1 * s22),
        -PI * g * (2.0 * pi2 * c22 * s21 - 4.0 * pi2 * s2 * s2 * s21),
    ]
}

fn pressure_gradient(t: f64, x: [f64; 2]) -> [f64; 2] {
    [
        2.0 * PI * t * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos(),
        -2.0 * PI * t * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin(),
    ]
}

/// Forcing that makes the exact pair solve the linearized momentum
/// equation with advecting field `u*(x) = u(0, x)`.
pub fn manufactured_forcing(mu: f64, t: f64, x: [f64; 2]) -> [f64; 2] {
    // d/dt u = u / (1 + t/2) * 1/2, since time enters as a scalar factor
    let u = exact_velocity(t, x);
    let dudt = [0.5 * u[0] / growth(t), 0.5 * u[1] / growth(t)];
    let lap = laplacian(t, x);
    let grad = exact_velocity_gradient(t, x);
    let a = exact_velocity(0.0, x);
    let conv = [
        a[0] * grad[0][0] + a[1] * grad[0][1],
        a[0] * grad[1][0] + a[1] * grad[1][1],
    ];
    let gp = pressure_gradient(t, x);
    [
        dudt[0] - 2.0 * mu * lap[0] + conv[0] + gp[0],
        dudt[1] - 2.0 * mu * lap[1] + conv[1] + gp[1],
    ]
}

/// The manufactured problem: exact Dirichlet data, exact initial state,
/// steady divergence-free advecting profile, analytic forcing.
pub fn manufactured_problem(mu: f64) -> ProblemData {
    ProblemData {
        advecting: Box::new(|_, x| exact_velocity(0.0, x)),
        advecting_divergence: Box::new(|_, _| 0.0),
        forcing: Box::new(move |t, x| manufactured_forcing(mu, t, x)),
        dirichlet: Box::new(exact_velocity),
        initial: Box::new(|x| exact_velocity(0.0, x)),
    }
}

/// Velocity bubble with zero boundary trace on the unit square.
pub fn bubble_velocity(x: [f64; 2]) -> [f64; 2] {
    let b = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
    [b, -b]
}

/// Named benchmark problems. `mu` parameterizes the manufactured forcing.
pub fn problem_from_registry(name: &str, mu: f64) -> Result<ProblemData> {
    match name {
        "zero" => Ok(ProblemData {
            advecting: Box::new(|_, _| [0.0, 0.0]),
            advecting_divergence: Box::new(|_, _| 0.0),
            forcing: Box::new(|_, _| [0.0, 0.0]),
            dirichlet: Box::new(|_, _| [0.0, 0.0]),
            initial: Box::new(|_| [0.0, 0.0]),
        }),
        // unforced decay of a bubble with a steady polynomial advector
        "decay" => Ok(ProblemData {
            advecting: Box::new(|_, x| [x[1], x[0]]),
            advecting_divergence: Box::new(|_, _| 0.0),
            forcing: Box::new(|_, _| [0.0, 0.0]),
            dirichlet: Box::new(|_, _| [0.0, 0.0]),
            initial: Box::new(bubble_velocity),
        }),
        // bubble with a steady polynomial body force
        "forced" => Ok(ProblemData {
            advecting: Box::new(|_, x| [x[1], x[0]]),
            advecting_divergence: Box::new(|_, _| 0.0),
            forcing: Box::new(|_, x| [x[1] * (1.0 - x[1]), -x[0]]),
            dirichlet: Box::new(|_, _| [0.0, 0.0]),
            initial: Box::new(bubble_velocity),
        }),
        "manufactured" => Ok(manufactured_problem(mu)),
        other => Err(SolverError::Config(format!(
            "unknown problem '{other}' (expected zero, decay, forced, manufactured)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_is_divergence_free_and_zero_on_the_reference_boundary_corners() {
        for t in [0.0, 0.4, 1.0] {
            for x in [[0.3, 0.7], [0.5, 0.5], [0.12, 0.91]] {
                let g = exact_velocity_gradient(t, x);
                assert!((g[0][0] + g[1][1]).abs() < 1e-12);
            }
            for x in [[0.0, 0.3], [1.0, 0.7], [0.4, 0.0], [0.9, 1.0]] {
                let u = exact_velocity(t, x);
                // the component tangent to that edge carries sin^2 of the
                // vanishing coordinate; both vanish on the reference frame
                assert!(u[0].abs() < 1e-12 && u[1].abs() < 1e-12, "{x:?} {u:?}");
            }
        }
    }

    #[test]
    fn gradient_and_laplacian_match_finite_differences() {
        let h = 1e-5;
        for t in [0.0, 0.7] {
            for x in [[0.31, 0.43], [0.77, 0.12]] {
                let g = exact_velocity_gradient(t, x);
                for comp in 0..2 {
                    for d in 0..2 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[d] += h;
                        xm[d] -= h;
                        let fd = (exact_velocity(t, xp)[comp] - exact_velocity(t, xm)[comp])
                            / (2.0 * h);
                        assert!((g[comp][d] - fd).abs() < 1e-6);
                    }
                }
                let lap = laplacian(t, x);
                for comp in 0..2 {
                    let mut fd = -4.0 * exact_velocity(t, x)[comp];
                    for d in 0..2 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[d] += h;
                        xm[d] -= h;
                        fd += exact_velocity(t, xp)[comp] + exact_velocity(t, xm)[comp];
                    }
                    assert!((lap[comp] - fd / (h * h)).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn forcing_matches_finite_difference_operator() {
        let mu = 0.1;
        let h = 1e-5;
        for t in [0.2, 0.9] {
            for x in [[0.41, 0.27], [0.66, 0.81]] {
                let f = manufactured_forcing(mu, t, x);
                let dudt = |c: usize| {
                    (exact_velocity(t + h, x)[c] - exact_velocity(t - h, x)[c]) / (2.0 * h)
                };
                let a = exact_velocity(0.0, x);
                for comp in 0..2 {
                    let mut lap = -4.0 * exact_velocity(t, x)[comp];
                    let mut conv = 0.0;
                    let mut gp = 0.0;
                    for d in 0..2 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[d] += h;
                        xm[d] -= h;
                        lap += exact_velocity(t, xp)[comp] + exact_velocity(t, xm)[comp];
                        conv += a[d]
                            * (exact_velocity(t, xp)[comp] - exact_velocity(t, xm)[comp])
                            / (2.0 * h);
                        if d == comp {
                            gp = (exact_pressure(t, xp) - exact_pressure(t, xm)) / (2.0 * h);
                        }
                    }
                    let fd = dudt(comp) - 2.0 * mu * lap / (h * h) + conv + gp;
                    assert!((f[comp] - fd).abs() < 1e-3, "comp {comp}: {} vs {fd}", f[comp]);
                }
            }
        }
    }

    #[test]
    fn pressure_has_zero_mean() {
        // midpoint-sampled mean over a fine grid
        let n = 200;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                total += exact_pressure(0.8, x);
            }
        }
        assert!((total / (n * n) as f64).abs() < 1e-10);
    }

    #[test]
    fn registry_resolves_and_rejects() {
        for name in ["zero", "decay", "forced", "manufactured"] {
            assert!(problem_from_registry(name, 0.1).is_ok());
        }
        assert!(problem_from_registry("vortex", 0.1).is_err());
    }
}
