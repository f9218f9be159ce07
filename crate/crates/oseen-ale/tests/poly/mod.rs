//! Independent assembly oracle for one implicit step, built from exact
//! symbolic polynomial integration instead of numerical quadrature.
//!
//! Every integrand of the step is a polynomial in the reference coordinates
//! of each (affine) cell, so the exact value of each matrix entry is a sum
//! of reference-triangle monomial integrals
//! `int xi^a eta^b = a! b! / (a + b + 2)!`. The oracle hardcodes the same
//! problem data its caller feeds the solver: advecting field `(x2, x1)`,
//! forcing `(x2 (1 - x2), -x1)`, Dirichlet values `(x2, x1)`.

use nalgebra::{DMatrix, DVector};
use oseen_ale::fem::FunctionSpace;
use oseen_ale::mesh_motion::DiscreteAleMap;
use oseen_ale::timestepper::SchemeConfig;

const MAX: usize = 8;

/// Dense bivariate polynomial in the reference coordinates (xi, eta).
#[derive(Clone, Copy)]
pub struct Poly {
    c: [[f64; MAX]; MAX],
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            c: [[0.0; MAX]; MAX],
        }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = v;
        p
    }

    /// a + b*xi + c*eta
    pub fn affine(a: f64, b: f64, c: f64) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = a;
        p.c[1][0] = b;
        p.c[0][1] = c;
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = *self;
        for i in 0..MAX {
            for j in 0..MAX {
                out.c[i][j] += other.c[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = *self;
        for i in 0..MAX {
            for j in 0..MAX {
                out.c[i][j] -= other.c[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for i in 0..MAX {
            for j in 0..MAX {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                for k in 0..MAX - i {
                    for l in 0..MAX - j {
                        out.c[i + k][j + l] += self.c[i][j] * other.c[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn dxi(&self) -> Poly {
        let mut out = Poly::zero();
        for i in 1..MAX {
            for j in 0..MAX {
                out.c[i - 1][j] = self.c[i][j] * i as f64;
            }
        }
        out
    }

    pub fn deta(&self) -> Poly {
        let mut out = Poly::zero();
        for i in 0..MAX {
            for j in 1..MAX {
                out.c[i][j - 1] = self.c[i][j] * j as f64;
            }
        }
        out
    }

    /// Exact integral over the reference triangle {xi, eta >= 0, xi+eta <= 1}.
    pub fn integral_ref(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..MAX {
            for j in 0..MAX {
                if self.c[i][j] != 0.0 {
                    total += self.c[i][j] * monomial_integral(i, j);
                }
            }
        }
        total
    }
}

/// `int_T xi^a eta^b = a! b! / (a + b + 2)!`
fn monomial_integral(a: usize, b: usize) -> f64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}

/// Affine geometry of one triangle: physical coordinates as polynomials and
/// the inverse-transpose Jacobian for physical gradients.
struct CellGeom {
    det: f64,
    /// (J^{-T})_{ab}
    it: [[f64; 2]; 2],
    x: [Poly; 2],
}

impl CellGeom {
    fn new(p: [[f64; 2]; 3]) -> Self {
        let j = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let it = [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]];
        let x = [
            Poly::affine(p[0][0], j[0][0], j[0][1]),
            Poly::affine(p[0][1], j[1][0], j[1][1]),
        ];
        CellGeom { det, it, x }
    }

    /// Physical gradient [d/dx1, d/dx2] of a reference-coordinate polynomial.
    fn grad(&self, q: &Poly) -> [Poly; 2] {
        let (qx, qe) = (q.dxi(), q.deta());
        [
            qx.scale(self.it[0][0]).add(&qe.scale(self.it[0][1])),
            qx.scale(self.it[1][0]).add(&qe.scale(self.it[1][1])),
        ]
    }

    /// `int_K q dx = det int_ref q`
    fn integrate(&self, q: &Poly) -> f64 {
        self.det * q.integral_ref()
    }
}

/// Barycentric coordinates as reference polynomials.
fn lambdas() -> [Poly; 3] {
    [
        Poly::affine(1.0, -1.0, -1.0),
        Poly::affine(0.0, 1.0, 0.0),
        Poly::affine(0.0, 0.0, 1.0),
    ]
}

/// The six quadratic basis functions in the local node order (vertices, then
/// the midpoints opposite each vertex).
fn p2_basis() -> [Poly; 6] {
    let l = lambdas();
    let vertex = |k: usize| l[k].mul(&l[k].scale(2.0).sub(&Poly::constant(1.0)));
    [
        vertex(0),
        vertex(1),
        vertex(2),
        l[1].mul(&l[2]).scale(4.0),
        l[0].mul(&l[2]).scale(4.0),
        l[0].mul(&l[1]).scale(4.0),
    ]
}

fn vertex_positions(positions: &[[f64; 2]], cell: [usize; 3]) -> [[f64; 2]; 3] {
    [positions[cell[0]], positions[cell[1]], positions[cell[2]]]
}

/// Full saddle system of one midpoint-variant implicit step, assembled
/// symbolically, for the fixed data documented above.
pub fn oracle_system(
    map: &DiscreteAleMap,
    space: &FunctionSpace,
    scheme: &SchemeConfig,
    dt: f64,
    u_old: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let mesh = map.mesh();
    let nu = space.num_velocity_dofs();
    let np = space.num_pressure_dofs();
    let dim = nu + np + 1;
    let phi = p2_basis();
    let lam = lambdas();

    let start = map.grid_positions(0);
    let end = map.grid_positions(1);
    let t_mid = map.time_grid()[0] + 0.5 * dt;
    let mid: Vec<[f64; 2]> = (0..mesh.num_nodes())
        .map(|k| map.node_position(t_mid, k))
        .collect();
    let w_nodal: Vec<[f64; 2]> = (0..mesh.num_nodes())
        .map(|k| {
            [
                (end[k][0] - start[k][0]) / dt,
                (end[k][1] - start[k][1]) / dt,
            ]
        })
        .collect();

    let mut m_end = DMatrix::zeros(nu, nu);
    let mut m_start = DMatrix::zeros(nu, nu);
    let mut k_visc = DMatrix::zeros(nu, nu); // dt (2 mu A + S + N + W)
    let mut b_div = DMatrix::zeros(np, nu);
    let mut mean_p: DVector<f64> = DVector::zeros(np);
    let mut f_vec: DVector<f64> = DVector::zeros(nu);

    for cell in 0..mesh.num_cells() {
        let verts = mesh.cells()[cell];
        let nodes = space.cell_nodes(cell);
        let g_start = CellGeom::new(vertex_positions(start, verts));
        let g_end = CellGeom::new(vertex_positions(end, verts));
        let g_mid = CellGeom::new(vertex_positions(&mid, verts));

        // advecting field minus mesh velocity, on the midpoint configuration
        let w_comp = |c: usize| {
            lam[0]
                .scale(w_nodal[verts[0]][c])
                .add(&lam[1].scale(w_nodal[verts[1]][c]))
                .add(&lam[2].scale(w_nodal[verts[2]][c]))
        };
        let a1 = g_mid.x[1].sub(&w_comp(0));
        let a2 = g_mid.x[0].sub(&w_comp(1));
        let div_a = g_mid.grad(&a1)[0].add(&g_mid.grad(&a2)[1]);

        // forcing at the midpoint configuration
        let f1 = g_mid.x[1].mul(&Poly::constant(1.0).sub(&g_mid.x[1]));
        let f2 = g_mid.x[0].scale(-1.0);

        // cell-mean physical basis gradients (area = det / 2)
        let grads_mid: Vec<[Poly; 2]> = phi.iter().map(|p| g_mid.grad(p)).collect();
        let means: Vec<[f64; 2]> = grads_mid
            .iter()
            .map(|g| [2.0 * g[0].integral_ref(), 2.0 * g[1].integral_ref()])
            .collect();

        for i in 0..6 {
            let gi = &grads_mid[i];
            for j in 0..6 {
                let gj = &grads_mid[j];
                let mass_end = g_end.integrate(&phi[i].mul(&phi[j]));
                let mass_start = g_start.integrate(&phi[i].mul(&phi[j]));
                let diffusion =
                    g_mid.integrate(&gi[0].mul(&gj[0]).add(&gi[1].mul(&gj[1])));
                let fine = {
                    let fi = [
                        gi[0].sub(&Poly::constant(means[i][0])),
                        gi[1].sub(&Poly::constant(means[i][1])),
                    ];
                    let fj = [
                        gj[0].sub(&Poly::constant(means[j][0])),
                        gj[1].sub(&Poly::constant(means[j][1])),
                    ];
                    g_mid.integrate(&fi[0].mul(&fj[0]).add(&fi[1].mul(&fj[1])))
                };
                let convection =
                    g_mid.integrate(&a1.mul(&gj[0]).add(&a2.mul(&gj[1])).mul(&phi[i]));
                let weighted = g_mid.integrate(&div_a.mul(&phi[j]).mul(&phi[i]));
                let k_local = dt
                    * (2.0 * scheme.mu * diffusion
                        + scheme.mu_t * fine
                        + convection
                        + weighted);
                for c in 0..2 {
                    let (r, s) = (2 * nodes[i] + c, 2 * nodes[j] + c);
                    m_end[(r, s)] += mass_end;
                    m_start[(r, s)] += mass_start;
                    k_visc[(r, s)] += k_local;
                }
            }
            for c in 0..2 {
                let fc = if c == 0 { &f1 } else { &f2 };
                f_vec[2 * nodes[i] + c] += g_mid.integrate(&fc.mul(&phi[i]));
            }
        }

        // divergence constraint and pressure mean on the end configuration
        for q in 0..3 {
            for j in 0..6 {
                let gj = g_end.grad(&phi[j]);
                for c in 0..2 {
                    b_div[(verts[q], 2 * nodes[j] + c)] +=
                        g_end.integrate(&lam[q].mul(&gj[c]));
                }
            }
            mean_p[verts[q]] += g_end.integrate(&lam[q]);
        }
    }

    let mut sys = DMatrix::zeros(dim, dim);
    sys.view_mut((0, 0), (nu, nu))
        .copy_from(&(m_end + k_visc));
    for r in 0..np {
        for c in 0..nu {
            sys[(c, nu + r)] = -dt * b_div[(r, c)];
            sys[(nu + r, c)] = b_div[(r, c)];
        }
        sys[(nu + r, nu + np)] = mean_p[r];
        sys[(nu + np, nu + r)] = mean_p[r];
    }
    let mut rhs = DVector::zeros(dim);
    let m_u_old = &m_start * u_old;
    for i in 0..nu {
        rhs[i] = m_u_old[i] + dt * f_vec[i];
    }
    for node in 0..space.num_scalar_nodes() {
        if !space.node_on_boundary(node) {
            continue;
        }
        let x = space.node_position(node, end);
        let g = [x[1], x[0]];
        for comp in 0..2 {
            let dof = 2 * node + comp;
            for c in 0..dim {
                sys[(dof, c)] = 0.0;
            }
            sys[(dof, dof)] = 1.0;
            rhs[dof] = g[comp];
        }
    }
    (sys, rhs)
}

/// One midpoint-variant implicit step, returning the new velocity
/// coefficients. On very small meshes the pressure block is rank-deficient
/// (too few free velocity rows to pin every pressure dof), but the system
/// is consistent and the velocity part of any solution is unique, so a
/// minimum-norm least-squares solve recovers it.
pub fn oracle_one_step(
    map: &DiscreteAleMap,
    space: &FunctionSpace,
    scheme: &SchemeConfig,
    dt: f64,
    u_old: &DVector<f64>,
) -> DVector<f64> {
    let nu = space.num_velocity_dofs();
    let (sys, rhs) = oracle_system(map, space, scheme, dt, u_old);
    let svd = sys.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).expect("oracle SVD solve");
    DVector::from_iterator(nu, (0..nu).map(|i| sol[i]))
}
