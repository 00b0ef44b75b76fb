//! Taylor-Hood (P2 velocity, P1 pressure) degrees of freedom.
//!
//! Velocity nodes are numbered vertices first, then edge midpoints in the
//! lexicographic order of [`Mesh::edge_table`]. Velocity dofs interleave the
//! components: node `n` owns dofs `2n` (x) and `2n + 1` (y). Pressure dofs are
//! the mesh vertices and follow the velocity block in the global system.

pub mod basis;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::assembly::SparsityPattern;
use crate::mesh::{BoundaryTag, Mesh, Point2};

#[derive(Debug)]
pub struct TaylorHoodSpace {
    mesh: Arc<Mesh>,
    edges: Vec<[usize; 2]>,
    edge_midpoints: Vec<Point2>,
    triangle_edges: Vec<[usize; 3]>,
    pattern: OnceLock<Arc<SparsityPattern>>,
}

impl TaylorHoodSpace {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let table = mesh.edge_table();
        let edge_midpoints =
            table.edges.iter().map(|&[a, b]| mesh.vertices()[a].midpoint(mesh.vertices()[b])).collect();
        TaylorHoodSpace {
            edges: table.edges,
            edge_midpoints,
            triangle_edges: table.triangle_edges,
            mesh,
            pattern: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Vertices plus edge midpoints.
    pub fn num_velocity_nodes(&self) -> usize {
        self.mesh.num_vertices() + self.edges.len()
    }

    pub fn num_velocity_dofs(&self) -> usize {
        2 * self.num_velocity_nodes()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// Size of the coupled velocity-pressure system.
    pub fn num_dofs(&self) -> usize {
        self.num_velocity_dofs() + self.num_pressure_dofs()
    }

    pub fn node_point(&self, node: usize) -> Point2 {
        let nv = self.mesh.num_vertices();
        if node < nv {
            self.mesh.vertices()[node]
        } else {
            self.edge_midpoints[node - nv]
        }
    }

    pub fn edge_node(&self, edge: usize) -> usize {
        self.mesh.num_vertices() + edge
    }

    /// The six P2 nodes of triangle `t` in local order.
    pub fn velocity_nodes(&self, t: usize) -> [usize; 6] {
        let [a, b, c] = self.mesh.triangles()[t];
        let [e0, e1, e2] = self.triangle_edges[t];
        let nv = self.mesh.num_vertices();
        [a, b, c, nv + e0, nv + e1, nv + e2]
    }

    /// Twelve interleaved velocity dofs of triangle `t`.
    pub fn velocity_dofs(&self, t: usize) -> [usize; 12] {
        let nodes = self.velocity_nodes(t);
        std::array::from_fn(|i| 2 * nodes[i / 2] + i % 2)
    }

    /// Pressure dofs of triangle `t` as indices into the global system.
    pub fn pressure_dofs(&self, t: usize) -> [usize; 3] {
        let off = self.num_velocity_dofs();
        self.mesh.triangles()[t].map(|v| off + v)
    }

    pub fn geometry(&self, t: usize) -> basis::TriangleGeometry {
        basis::TriangleGeometry::new(self.mesh.triangle_points(t))
    }

    /// Velocity and pressure couplings of the full saddle-point system,
    /// built once per space.
    pub fn system_pattern(&self) -> Arc<SparsityPattern> {
        self.pattern.get_or_init(|| Arc::new(SparsityPattern::taylor_hood(self))).clone()
    }

    /// Nodal interpolant of a vector field, as velocity coefficients.
    pub fn interpolate(&self, f: impl Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.num_velocity_dofs()];
        for node in 0..self.num_velocity_nodes() {
            let v = f(self.node_point(node));
            u[2 * node] = v[0];
            u[2 * node + 1] = v[1];
        }
        u
    }

    /// Nodal interpolant of a scalar field on the pressure (vertex) dofs.
    pub fn interpolate_pressure(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        self.mesh.vertices().iter().map(|&p| f(p)).collect()
    }
}

/// Parabolic inflow `u_D = -U (1 + y)(1 - y) n` on the channel `y in [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflowProfile {
    pub peak: f64,
}

impl InflowProfile {
    pub fn new(peak: f64) -> Self {
        assert!(peak > 0.0 && peak.is_finite(), "peak inflow speed must be positive");
        InflowProfile { peak }
    }

    pub fn value(&self, p: Point2, outward_normal: [f64; 2]) -> [f64; 2] {
        let s = -self.peak * (1.0 + p.y) * (1.0 - p.y);
        [s * outward_normal[0], s * outward_normal[1]]
    }

    /// The same parabola as a field pointing in `+x`.
    pub fn poiseuille(&self, p: Point2) -> [f64; 2] {
        [self.peak * (1.0 + p.y) * (1.0 - p.y), 0.0]
    }
}

/// Which problem the boundary data are collected for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcScenario {
    /// Full fictitious domain; obstacles are handled by the penalty.
    Penalized,
    /// Fluid submesh with no-slip on the obstacle boundaries.
    Reference,
}

/// Treatment of the outflow boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutflowCondition {
    /// Natural `-nu du/dn + p n = 0`; no Dirichlet rows.
    #[default]
    DoNothing,
    /// Poiseuille profile prescribed in `+x` direction (pure Dirichlet
    /// problem; the pressure then needs a gauge).
    Poiseuille,
}

#[derive(Debug, Error, PartialEq)]
pub enum DirichletError {
    #[error("node {node} at ({x}, {y}) prescribed both {first:?} and {second:?}")]
    CornerConflict { node: usize, x: f64, y: f64, first: [f64; 2], second: [f64; 2] },
}

/// Prescribed values keyed by global dof, in increasing dof order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletSet {
    values: BTreeMap<usize, f64>,
}

impl DirichletSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dof: usize, value: f64) {
        self.values.insert(dof, value);
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.values.contains_key(&dof)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    /// Same dofs with every value set to zero (Newton corrections).
    pub fn homogeneous(&self) -> DirichletSet {
        DirichletSet { values: self.values.keys().map(|&k| (k, 0.0)).collect() }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &k in self.values.keys() {
            m[k] = true;
        }
        m
    }
}

/// Collects strong velocity boundary values: inflow nodes take the profile,
/// wall nodes zero, outflow nodes are free unless `outflow` prescribes them,
/// and obstacle-boundary nodes are zero in the reference scenario.
pub fn collect_dirichlet(
    space: &TaylorHoodSpace,
    scenario: BcScenario,
    profile: InflowProfile,
    outflow: OutflowCondition,
) -> Result<DirichletSet, DirichletError> {
    let mesh = space.mesh();
    let table = mesh.edge_table();
    let owners = mesh.facet_owners();
    let mut node_values: BTreeMap<usize, [f64; 2]> = BTreeMap::new();

    for (facet, &owner) in mesh.boundary_facets().iter().zip(&owners) {
        let normal = mesh.facet_normal(facet, owner);
        let rule: Option<Box<dyn Fn(Point2) -> [f64; 2]>> = match (facet.tag, outflow, scenario) {
            (BoundaryTag::Inflow, _, _) => Some(Box::new(move |p| profile.value(p, normal))),
            (BoundaryTag::Wall, _, _) => Some(Box::new(|_| [0.0, 0.0])),
            (BoundaryTag::Outflow, OutflowCondition::DoNothing, _) => None,
            (BoundaryTag::Outflow, OutflowCondition::Poiseuille, _) => Some(Box::new(move |p| profile.poiseuille(p))),
            (BoundaryTag::ObstacleBoundary(_), _, BcScenario::Reference) => Some(Box::new(|_| [0.0, 0.0])),
            (BoundaryTag::ObstacleBoundary(_), _, BcScenario::Penalized) => None,
        };
        let Some(rule) = rule else { continue };
        let [a, b] = facet.edge;
        let edge = table.find(a, b).expect("facet is a mesh edge");
        for node in [a, b, space.edge_node(edge)] {
            let p = space.node_point(node);
            let value = rule(p);
            match node_values.get(&node) {
                Some(prev) => {
                    if (prev[0] - value[0]).abs() > 1e-12 || (prev[1] - value[1]).abs() > 1e-12 {
                        return Err(DirichletError::CornerConflict {
                            node,
                            x: p.x,
                            y: p.y,
                            first: *prev,
                            second: value,
                        });
                    }
                }
                None => {
                    node_values.insert(node, value);
                }
            }
        }
    }

    let mut set = DirichletSet::new();
    for (node, v) in node_values {
        // -0.0 from the profile at its roots is stored as 0.0
        set.insert(2 * node, v[0] + 0.0);
        set.insert(2 * node + 1, v[1] + 0.0);
    }
    Ok(set)
}
