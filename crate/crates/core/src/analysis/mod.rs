//! Error norms, boundary fluxes, discrete conservation checks and penalty
//! rates.

mod study;

use thiserror::Error;

pub use study::{
    penalty_list, run_convergence_study, ConvergenceRecord, StudyConfig, StudyError, StudyFailure, StudyOutput,
};

use crate::assembly::quadrature::{D4_POINTS, D4_WEIGHTS};
use crate::mesh::{BoundaryTag, SubmeshMap};
use crate::par::Execution;
use crate::solver::{Discretization, FlowSolution, SolveError};
use crate::spaces::basis::{barycentric, p1_values, p2_values, TriangleGeometry};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("submesh map has {map} triangles but the reference mesh has {mesh}")]
    MapSize { map: usize, mesh: usize },
    #[error("reference triangle {triangle} maps to parent {parent}, outside the penalized mesh")]
    ParentOutOfRange { triangle: usize, parent: usize },
    #[error("reference triangle {triangle} does not coincide with its parent {parent}")]
    GeometryMismatch { triangle: usize, parent: usize },
}

fn local_coefficients(sol: &FlowSolution, t: usize) -> [f64; 12] {
    sol.space().velocity_dofs(t).map(|d| sol.velocity()[d])
}

/// `(value, gradient)` of the P2 velocity with local coefficients `coef`.
fn evaluate(geo: &TriangleGeometry, coef: &[f64; 12], l: [f64; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
    let phi = p2_values(l);
    let grad = geo.p2_gradients(l);
    let mut u = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for a in 0..6 {
        for i in 0..2 {
            u[i] += phi[a] * coef[2 * a + i];
            g[i][0] += coef[2 * a + i] * grad[a][0];
            g[i][1] += coef[2 * a + i] * grad[a][1];
        }
    }
    (u, g)
}

/// `int_t f(u, grad u)` by the degree-4 rule, exact for products of two P2
/// fields.
fn integrate(geo: &TriangleGeometry, coef: &[f64; 12], f: impl Fn([f64; 2], [[f64; 2]; 2]) -> f64) -> f64 {
    let jac = 2.0 * geo.area;
    D4_POINTS
        .iter()
        .zip(D4_WEIGHTS)
        .map(|(q, w)| {
            let (u, g) = evaluate(geo, coef, barycentric(q[0], q[1]));
            w * jac * f(u, g)
        })
        .sum()
}

fn squared_l2(u: [f64; 2], _: [[f64; 2]; 2]) -> f64 {
    u[0] * u[0] + u[1] * u[1]
}

fn squared_grad(_: [f64; 2], g: [[f64; 2]; 2]) -> f64 {
    g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]
}

/// `||u||_0` over the listed triangles.
pub fn l2_norm_region(sol: &FlowSolution, triangles: &[usize]) -> f64 {
    let space = sol.space();
    Execution::default()
        .sum(triangles.len(), |k| {
            let t = triangles[k];
            integrate(&space.geometry(t), &local_coefficients(sol, t), squared_l2)
        })
        .sqrt()
}

/// `||u||_0` over the whole mesh.
pub fn l2_norm(sol: &FlowSolution) -> f64 {
    let all: Vec<usize> = (0..sol.space().mesh().num_triangles()).collect();
    l2_norm_region(sol, &all)
}

/// `|u|_1` over the listed triangles.
pub fn h1_seminorm_region(sol: &FlowSolution, triangles: &[usize]) -> f64 {
    let space = sol.space();
    Execution::default()
        .sum(triangles.len(), |k| {
            let t = triangles[k];
            integrate(&space.geometry(t), &local_coefficients(sol, t), squared_grad)
        })
        .sqrt()
}

pub fn h1_seminorm(sol: &FlowSolution) -> f64 {
    let all: Vec<usize> = (0..sol.space().mesh().num_triangles()).collect();
    h1_seminorm_region(sol, &all)
}

/// `|u - u_R|_1` over the penalized mesh, with the reference solution
/// (living on the fluid submesh) extended by zero into the obstacles.
pub fn h1_seminorm_diff(
    reference: &FlowSolution,
    penalized: &FlowSolution,
    map: &SubmeshMap,
) -> Result<f64, AnalysisError> {
    let ref_mesh = reference.space().mesh();
    let pen_mesh = penalized.space().mesh();
    if map.triangle_to_parent.len() != ref_mesh.num_triangles() {
        return Err(AnalysisError::MapSize { map: map.triangle_to_parent.len(), mesh: ref_mesh.num_triangles() });
    }
    for (t, &parent) in map.triangle_to_parent.iter().enumerate() {
        if parent >= pen_mesh.num_triangles() {
            return Err(AnalysisError::ParentOutOfRange { triangle: t, parent });
        }
        if ref_mesh.triangle_points(t) != pen_mesh.triangle_points(parent) {
            return Err(AnalysisError::GeometryMismatch { triangle: t, parent });
        }
    }
    let children = map.parent_to_triangle(pen_mesh.num_triangles());
    let sum = Execution::default().sum(pen_mesh.num_triangles(), |parent| {
        let pen = local_coefficients(penalized, parent);
        let diff = match children[parent] {
            Some(t) => {
                let r = local_coefficients(reference, t);
                std::array::from_fn(|i| r[i] - pen[i])
            }
            None => pen,
        };
        integrate(&penalized.space().geometry(parent), &diff, squared_grad)
    });
    Ok(sum.sqrt())
}

/// `int u . n` over the boundary facets carrying `tag`, by 3-point Gauss on
/// each edge.
pub fn flux(sol: &FlowSolution, tag: BoundaryTag) -> f64 {
    let space = sol.space();
    let mesh = space.mesh();
    let table = mesh.edge_table();
    let owners = mesh.facet_owners();
    let gauss = [
        (0.5 - 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
    ];
    let mut total = 0.0;
    for (facet, &owner) in mesh.boundary_facets().iter().zip(&owners) {
        if facet.tag != tag {
            continue;
        }
        let [a, b] = facet.edge;
        let m = space.edge_node(table.find(a, b).expect("facet is a mesh edge"));
        let n = mesh.facet_normal(facet, owner);
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let length = (pb.x - pa.x).hypot(pb.y - pa.y);
        let un = |node: usize| sol.velocity()[2 * node] * n[0] + sol.velocity()[2 * node + 1] * n[1];
        let (ua, ub, um) = (un(a), un(b), un(m));
        for (s, w) in gauss {
            let trace = ua * (1.0 - s) * (1.0 - 2.0 * s) + ub * s * (2.0 * s - 1.0) + um * 4.0 * s * (1.0 - s);
            total += w * length * trace;
        }
    }
    total
}

/// Largest `|int q_i div u| / (max|u| * |supp q_i|)` over the P1 pressure
/// basis.
pub fn max_divergence_moment(sol: &FlowSolution) -> f64 {
    let space = sol.space();
    let mesh = space.mesh();
    let nv = mesh.num_vertices();
    let mut moments = vec![0.0; nv];
    let mut support = vec![0.0; nv];
    let per_triangle = Execution::default().map(mesh.num_triangles(), |t| {
        let geo = space.geometry(t);
        let coef = local_coefficients(sol, t);
        let mut m = [0.0; 3];
        for (q, w) in D4_POINTS.iter().zip(D4_WEIGHTS) {
            let l = barycentric(q[0], q[1]);
            let (_, g) = evaluate(&geo, &coef, l);
            let div = g[0][0] + g[1][1];
            let psi = p1_values(l);
            for k in 0..3 {
                m[k] += w * 2.0 * geo.area * psi[k] * div;
            }
        }
        m
    });
    for (t, m) in per_triangle.iter().enumerate() {
        let area = mesh.triangle_area(t);
        for (k, &v) in mesh.triangles()[t].iter().enumerate() {
            moments[v] += m[k];
            support[v] += area;
        }
    }
    let scale = sol.velocity().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    moments.iter().zip(&support).map(|(m, a)| m.abs() / (scale * a)).fold(0.0, f64::max)
}

/// Both sides of the penalized Stokes energy identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    /// `nu |u|_1^2`
    pub dissipation: f64,
    /// `R ||u||_{0,S}^2`
    pub penalty: f64,
    /// `sum_{i in D} x_i (K x)_i`: work done by the prescribed boundary
    /// values, from the unreduced matrix.
    pub boundary_work: f64,
}

impl EnergyBalance {
    pub fn relative_defect(&self) -> f64 {
        let lhs = self.dissipation + self.penalty;
        (lhs - self.boundary_work).abs() / lhs.abs().max(self.boundary_work.abs())
    }
}

pub fn energy_balance(disc: &Discretization, magnitude: f64, sol: &FlowSolution) -> Result<EnergyBalance, SolveError> {
    let nu = disc.config().nu;
    let field = disc.penalty(magnitude)?;
    let dissipation = nu * h1_seminorm(sol).powi(2);
    let penalty = field.magnitude() * l2_norm_region(sol, &field.obstacle_triangles()).powi(2);
    let k = disc.stokes_system(magnitude)?.matrix;
    let x = sol.to_system_vector();
    let boundary_work =
        disc.dirichlet().iter().map(|(d, _)| x[d] * k.row(d).map(|(j, a)| a * x[j]).sum::<f64>()).sum();
    Ok(EnergyBalance { dissipation, penalty, boundary_work })
}

/// `rate_i = log(e_{i-1} / e_i) / log(R_i / R_{i-1})`; the first entry has
/// no rate.
pub fn rates(penalties: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(penalties.len(), errors.len());
    (0..errors.len())
        .map(|i| {
            (i > 0).then(|| (errors[i - 1] / errors[i]).ln() / (penalties[i] / penalties[i - 1]).ln())
        })
        .collect()
}

/// Least-squares slope of `log e` against `log R`.
pub fn loglog_slope(penalties: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(penalties.len(), errors.len());
    let n = penalties.len() as f64;
    let xs: Vec<f64> = penalties.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::{generate_channel_mesh, AxisRect, Point2};
    use crate::solver::{Scenario, SolutionMeta};
    use crate::spaces::TaylorHoodSpace;

    fn field(space: &Arc<TaylorHoodSpace>, f: impl Fn(Point2) -> [f64; 2]) -> FlowSolution {
        let meta = SolutionMeta { nu: 1.0, peak_speed: 1.0, scenario: Scenario::Penalized, penalty: Some(0.0) };
        FlowSolution::new(space.clone(), space.interpolate(f), vec![0.0; space.num_pressure_dofs()], meta).unwrap()
    }

    fn unit_square(h: f64) -> Arc<TaylorHoodSpace> {
        let mesh = generate_channel_mesh(AxisRect::new(0.0, 1.0, 0.0, 1.0), &[], h).unwrap();
        Arc::new(TaylorHoodSpace::new(Arc::new(mesh)))
    }

    #[test]
    fn norms_of_simple_fields() {
        let space = unit_square(0.25);
        assert_eq!(l2_norm(&field(&space, |_| [0.0, 0.0])), 0.0);
        assert!((l2_norm(&field(&space, |_| [1.0, 0.0])) - 1.0).abs() < 1e-14);
        let linear = field(&space, |p| [p.x, 0.0]);
        assert!((h1_seminorm(&linear) - 1.0).abs() < 1e-14);
        // int_0^1 int_0^1 (x^2)^2 = 1/5
        let quad = field(&space, |p| [0.0, p.x * p.x]);
        assert!((l2_norm(&quad).powi(2) - 0.2).abs() < 1e-14);
        // |grad (x y)|^2 = y^2 + x^2 integrates to 2/3
        let bilinear = field(&space, |p| [p.x * p.y, 0.0]);
        assert!((h1_seminorm(&bilinear).powi(2) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn region_norm_of_constant() {
        let space = unit_square(0.25);
        let one = field(&space, |_| [1.0, 0.0]);
        let tris = [0, 3, 7];
        let area: f64 = tris.iter().map(|&t| space.mesh().triangle_area(t)).sum();
        assert!((l2_norm_region(&one, &tris) - area.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flux_of_parabola_and_divergence_of_rotation() {
        let mesh = Arc::new(generate_channel_mesh(AxisRect::new(-2.0, 2.0, -1.0, 1.0), &[], 0.5).unwrap());
        let space = Arc::new(TaylorHoodSpace::new(mesh));
        let profile = field(&space, |p| [100.0 * (1.0 - p.y * p.y), 0.0]);
        assert!((flux(&profile, BoundaryTag::Inflow) + 400.0 / 3.0).abs() < 1e-11);
        assert!((flux(&profile, BoundaryTag::Outflow) - 400.0 / 3.0).abs() < 1e-11);
        assert_eq!(flux(&profile, BoundaryTag::Wall), 0.0);
        assert!(max_divergence_moment(&profile) < 1e-14);
        let rot = field(&space, |p| [-p.y, p.x]);
        assert!(max_divergence_moment(&rot) < 1e-14);
        let source = field(&space, |p| [p.x, p.y]);
        assert!((max_divergence_moment(&source) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rates_of_power_law() {
        let r = [1.0, 10.0, 100.0, 1e3];
        let e: Vec<f64> = r.iter().map(|x| 3.0 / x).collect();
        let rates = rates(&r, &e);
        assert_eq!(rates[0], None);
        for rate in &rates[1..] {
            assert!((rate.unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((loglog_slope(&r, &e) + 1.0).abs() < 1e-14);
    }
}
