//! Global assembly of the penalized Stokes and Navier-Stokes forms.
//!
//! The coupled system is ordered `[velocity | pressure]` and assembled in
//! symmetric saddle form
//!
//! ```text
//! [ nu A + M_psi   B^T ] [u]
//! [ B              0   ] [p]
//! ```
//!
//! with `A` the vector P2 stiffness, `M_psi` the velocity mass matrix weighted
//! by the penalty field and `B_ij = -(q_i, div phi_j)`. Elements are computed
//! through [`Execution::map`] and scattered sequentially in element order, so
//! the value arrays do not depend on the execution policy.

pub mod quadrature;
pub mod sparse;

use thiserror::Error;

pub use quadrature::{quadrature_rule, QuadratureRule, UnsupportedDegree};
pub use sparse::{CsrMatrix, SparsityPattern};

use crate::par::Execution;
use crate::penalty::PenaltyField;
use crate::spaces::basis::{barycentric, p2_values, TriangleGeometry};
use crate::spaces::{DirichletSet, TaylorHoodSpace};
use quadrature::{D4_POINTS, D4_WEIGHTS, D5_POINTS, D5_WEIGHTS};

#[derive(Debug, Error, PartialEq)]
pub enum AssemblyError {
    #[error("penalty field covers {field} triangles, mesh has {mesh}")]
    PenaltyMismatch { field: usize, mesh: usize },
    #[error("velocity vector has {got} entries, space has {expected} velocity dofs")]
    VelocityLength { got: usize, expected: usize },
    #[error("dirichlet conditions were already eliminated from this system")]
    AlreadyEliminated,
    #[error("dirichlet dof {dof} is outside the system of size {size}")]
    DofOutOfRange { dof: usize, size: usize },
}

/// Matrix, right-hand side and the record of which rows were eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    dirichlet: Option<Vec<bool>>,
}

impl LinearSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        assert_eq!(matrix.nrows(), rhs.len());
        LinearSystem { matrix, rhs, dirichlet: None }
    }

    pub fn is_eliminated(&self) -> bool {
        self.dirichlet.is_some()
    }

    /// Rows replaced by identity rows, if elimination has happened.
    pub fn dirichlet_mask(&self) -> Option<&[bool]> {
        self.dirichlet.as_deref()
    }
}

/// Element matrices of the Stokes operator.
struct StokesElement {
    velocity: [[f64; 12]; 12],
    divergence: [[f64; 12]; 3],
}

fn stokes_element(geo: &TriangleGeometry, nu: f64, penalty: f64) -> StokesElement {
    let mut velocity = [[0.0; 12]; 12];
    let mut divergence = [[0.0; 12]; 3];
    let jac = 2.0 * geo.area;
    for (q, wq) in D4_POINTS.iter().zip(D4_WEIGHTS) {
        let l = barycentric(q[0], q[1]);
        let phi = p2_values(l);
        let grad = geo.p2_gradients(l);
        let w = wq * jac;
        for a in 0..6 {
            for b in 0..6 {
                let s = nu * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]) + penalty * phi[a] * phi[b];
                velocity[2 * a][2 * b] += w * s;
                velocity[2 * a + 1][2 * b + 1] += w * s;
            }
        }
        for (i, row) in divergence.iter_mut().enumerate() {
            for b in 0..6 {
                for c in 0..2 {
                    row[2 * b + c] -= w * l[i] * grad[b][c];
                }
            }
        }
    }
    StokesElement { velocity, divergence }
}

/// Assembles the penalized Stokes matrix with a zero right-hand side. The
/// outflow do-nothing condition is natural and adds no boundary term.
pub fn assemble_stokes(
    space: &TaylorHoodSpace,
    nu: f64,
    psi: &PenaltyField,
    exec: Execution,
) -> Result<LinearSystem, AssemblyError> {
    let mesh = space.mesh();
    if psi.len() != mesh.num_triangles() {
        return Err(AssemblyError::PenaltyMismatch { field: psi.len(), mesh: mesh.num_triangles() });
    }
    let elements = exec.map(mesh.num_triangles(), |t| stokes_element(&space.geometry(t), nu, psi.value(t)));

    let mut matrix = CsrMatrix::zeros(&space.system_pattern());
    for (t, el) in elements.iter().enumerate() {
        let vel = space.velocity_dofs(t);
        let pre = space.pressure_dofs(t);
        for (i, &gi) in vel.iter().enumerate() {
            for (j, &gj) in vel.iter().enumerate() {
                if el.velocity[i][j] != 0.0 {
                    matrix.add(gi, gj, el.velocity[i][j]);
                }
            }
        }
        for (k, &pk) in pre.iter().enumerate() {
            for (j, &gj) in vel.iter().enumerate() {
                matrix.add(pk, gj, el.divergence[k][j]);
                matrix.add(gj, pk, el.divergence[k][j]);
            }
        }
    }
    let n = space.num_dofs();
    Ok(LinearSystem::new(matrix, vec![0.0; n]))
}

struct ConvectionElement {
    residual: [f64; 12],
    jacobian: [[f64; 12]; 12],
}

fn convection_element(geo: &TriangleGeometry, coef: &[f64; 12]) -> ConvectionElement {
    let mut residual = [0.0; 12];
    let mut jacobian = [[0.0; 12]; 12];
    let jac = 2.0 * geo.area;
    for (q, wq) in D5_POINTS.iter().zip(D5_WEIGHTS) {
        let l = barycentric(q[0], q[1]);
        let phi = p2_values(l);
        let grad = geo.p2_gradients(l);
        let w = wq * jac;

        let mut u = [0.0; 2];
        // g[i][j] = d u_i / d x_j
        let mut g = [[0.0; 2]; 2];
        for a in 0..6 {
            for i in 0..2 {
                u[i] += phi[a] * coef[2 * a + i];
                g[i][0] += coef[2 * a + i] * grad[a][0];
                g[i][1] += coef[2 * a + i] * grad[a][1];
            }
        }
        let gu = [g[0][0] * u[0] + g[0][1] * u[1], g[1][0] * u[0] + g[1][1] * u[1]];
        let u_dot_grad: [f64; 6] = std::array::from_fn(|b| u[0] * grad[b][0] + u[1] * grad[b][1]);

        for a in 0..6 {
            let wa = w * phi[a];
            for i in 0..2 {
                residual[2 * a + i] += wa * gu[i];
                for b in 0..6 {
                    for k in 0..2 {
                        let advect = if i == k { u_dot_grad[b] } else { 0.0 };
                        jacobian[2 * a + i][2 * b + k] += wa * (advect + g[i][k] * phi[b]);
                    }
                }
            }
        }
    }
    ConvectionElement { residual, jacobian }
}

/// Convection residual `((grad u) u, w)` over the velocity dofs and its full
/// Newton Jacobian `((grad du) u, w) + ((grad u) du, w)`, the latter on the
/// system pattern with empty pressure rows and columns.
pub fn assemble_convection(
    space: &TaylorHoodSpace,
    u: &[f64],
    exec: Execution,
) -> Result<(Vec<f64>, CsrMatrix), AssemblyError> {
    if u.len() != space.num_velocity_dofs() {
        return Err(AssemblyError::VelocityLength { got: u.len(), expected: space.num_velocity_dofs() });
    }
    let mesh = space.mesh();
    let elements = exec.map(mesh.num_triangles(), |t| {
        let dofs = space.velocity_dofs(t);
        let coef = dofs.map(|d| u[d]);
        convection_element(&space.geometry(t), &coef)
    });

    let mut residual = vec![0.0; space.num_velocity_dofs()];
    let mut jacobian = CsrMatrix::zeros(&space.system_pattern());
    for (t, el) in elements.iter().enumerate() {
        let dofs = space.velocity_dofs(t);
        for (i, &gi) in dofs.iter().enumerate() {
            residual[gi] += el.residual[i];
            for (j, &gj) in dofs.iter().enumerate() {
                jacobian.add(gi, gj, el.jacobian[i][j]);
            }
        }
    }
    Ok((residual, jacobian))
}

/// Strong Dirichlet conditions by symmetric elimination: prescribed values
/// move to the right-hand side of the free rows, constrained rows and columns
/// are dropped and the constrained diagonal becomes 1.
pub fn apply_dirichlet(system: &LinearSystem, dirichlet: &DirichletSet) -> Result<LinearSystem, AssemblyError> {
    if system.is_eliminated() {
        return Err(AssemblyError::AlreadyEliminated);
    }
    let n = system.matrix.nrows();
    if let Some((dof, _)) = dirichlet.iter().find(|&(d, _)| d >= n) {
        return Err(AssemblyError::DofOutOfRange { dof, size: n });
    }
    let mask = dirichlet.mask(n);
    let mut g = vec![0.0; n];
    for (d, v) in dirichlet.iter() {
        g[d] = v;
    }

    let a = &system.matrix;
    let mut rhs = system.rhs.clone();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(a.nnz());
    let mut values = Vec::with_capacity(a.nnz());
    row_offsets.push(0);
    for i in 0..n {
        if mask[i] {
            col_indices.push(i);
            values.push(1.0);
            rhs[i] = g[i];
        } else {
            for (j, v) in a.row(i) {
                if mask[j] {
                    rhs[i] -= v * g[j];
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_raw(n, a.ncols(), row_offsets, col_indices, values),
        rhs,
        dirichlet: Some(mask),
    })
}
