//! Conforming triangle meshes of the channel-with-obstacles geometry.

mod generate;
pub mod msh;
mod submesh;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_channel_mesh, AxisRect};
pub use msh::{parse_msh, write_msh, MshError, PhysicalKind, TagDictionary};
pub use submesh::{extract_fluid_submesh, SubmeshMap};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Boundary condition class of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryTag {
    Inflow,
    Outflow,
    Wall,
    /// Interface with obstacle `id`, present only once the obstacle is cut out.
    ObstacleBoundary(u32),
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Inflow => f.write_str("inflow"),
            BoundaryTag::Outflow => f.write_str("outflow"),
            BoundaryTag::Wall => f.write_str("wall"),
            BoundaryTag::ObstacleBoundary(id) => write!(f, "obstacle_boundary{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionTag {
    Fluid,
    Obstacle(u32),
}

impl RegionTag {
    pub fn is_obstacle(self) -> bool {
        matches!(self, RegionTag::Obstacle(_))
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionTag::Fluid => f.write_str("fluid"),
            RegionTag::Obstacle(id) => write!(f, "obstacle{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFacet {
    pub edge: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("triangle {triangle} references vertex {vertex} out of range")]
    VertexOutOfRange { triangle: usize, vertex: usize },
    #[error("triangle {triangle} has non-positive area {area:e}")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("boundary facet ({0}, {1}) is not an edge of exactly one triangle")]
    DanglingEdge(usize, usize),
    #[error("boundary facet ({0}, {1}) is tagged more than once")]
    DuplicateFacet(usize, usize),
    #[error("boundary edge ({0}, {1}) carries no boundary tag")]
    UntaggedBoundaryEdge(usize, usize),
    #[error("{triangles} triangles but {regions} region tags")]
    RegionCountMismatch { triangles: usize, regions: usize },
    #[error("obstacle ids are not contiguous from 1: found {0:?}")]
    NonContiguousObstacleIds(Vec<u32>),
    #[error("euler characteristic {found} does not match components - holes = {expected}")]
    EulerMismatch { found: i64, expected: i64 },
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("obstacle rectangle {index} is not aligned with the grid: {reason}")]
    NotSnappable { index: usize, reason: String },
    #[error("obstacle rectangle {0} lies outside the channel")]
    RectangleOutsideDomain(usize),
    #[error("obstacle rectangles {0} and {1} overlap")]
    OverlappingObstacles(usize, usize),
}

/// Immutable triangle mesh with counterclockwise triangles, tagged boundary
/// edges and one region tag per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_facets: Vec<BoundaryFacet>,
    regions: Vec<RegionTag>,
}

/// Signed area of the triangle `(a, b, c)`; positive when counterclockwise.
pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Local edges of a triangle as pairs of local vertex indices.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

impl Mesh {
    /// Validates and builds a mesh. Clockwise triangles are flipped to
    /// counterclockwise; everything else is checked, not repaired.
    pub fn new(
        vertices: Vec<Point2>,
        mut triangles: Vec<[usize; 3]>,
        boundary_facets: Vec<BoundaryFacet>,
        regions: Vec<RegionTag>,
    ) -> Result<Self, MeshError> {
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::NonFiniteVertex(i));
        }
        if regions.len() != triangles.len() {
            return Err(MeshError::RegionCountMismatch { triangles: triangles.len(), regions: regions.len() });
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange { triangle: t, vertex: v });
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area < 0.0 {
                tri.swap(1, 2);
            } else if area == 0.0 || area.is_nan() {
                return Err(MeshError::DegenerateTriangle { triangle: t, area });
            }
        }

        let mut edge_count: HashMap<(usize, usize), u8> = HashMap::new();
        for tri in &triangles {
            for [a, b] in LOCAL_EDGES {
                let c = edge_count.entry(edge_key(tri[a], tri[b])).or_insert(0);
                *c += 1;
                if *c > 2 {
                    let (a, b) = edge_key(tri[a], tri[b]);
                    return Err(MeshError::NonManifoldEdge(a, b));
                }
            }
        }
        let mut tagged: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for f in &boundary_facets {
            let key = edge_key(f.edge[0], f.edge[1]);
            if edge_count.get(&key) != Some(&1) {
                return Err(MeshError::DanglingEdge(key.0, key.1));
            }
            if tagged.insert(key, f.tag).is_some() {
                return Err(MeshError::DuplicateFacet(key.0, key.1));
            }
        }
        let mut untagged: Vec<_> =
            edge_count.iter().filter(|(k, &c)| c == 1 && !tagged.contains_key(k)).map(|(k, _)| *k).collect();
        untagged.sort_unstable();
        if let Some(&(a, b)) = untagged.first() {
            return Err(MeshError::UntaggedBoundaryEdge(a, b));
        }

        let mut ids: Vec<u32> = regions
            .iter()
            .filter_map(|r| match r {
                RegionTag::Obstacle(id) => Some(*id),
                RegionTag::Fluid => None,
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
            return Err(MeshError::NonContiguousObstacleIds(ids));
        }

        Ok(Mesh { vertices, triangles, boundary_facets, regions })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn regions(&self) -> &[RegionTag] {
        &self.regions
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangle_points(t);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Number of distinct obstacle ids.
    pub fn num_obstacles(&self) -> usize {
        self.regions
            .iter()
            .filter_map(|r| match r {
                RegionTag::Obstacle(id) => Some(*id as usize),
                RegionTag::Fluid => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn obstacle_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| self.regions[t].is_obstacle()).collect()
    }

    /// Same geometry with the region tags replaced.
    pub fn with_regions(&self, regions: Vec<RegionTag>) -> Result<Mesh, MeshError> {
        Mesh::new(self.vertices.clone(), self.triangles.clone(), self.boundary_facets.clone(), regions)
    }

    /// Diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    }

    /// Unique undirected edges, sorted lexicographically, and for each
    /// triangle the indices of its local edges in [`LOCAL_EDGES`] order.
    pub fn edge_table(&self) -> EdgeTable {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|tri| LOCAL_EDGES.iter().map(move |&[a, b]| edge_key(tri[a], tri[b])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let triangle_edges = self
            .triangles
            .iter()
            .map(|tri| LOCAL_EDGES.map(|[a, b]| index[&edge_key(tri[a], tri[b])]))
            .collect();
        EdgeTable { edges: edges.into_iter().map(|(a, b)| [a, b]).collect(), triangle_edges, index }
    }

    /// Outward unit normal of a boundary facet, computed from the triangle
    /// that owns the edge.
    pub fn facet_normal(&self, facet: &BoundaryFacet, owner: usize) -> [f64; 2] {
        let [a, b] = facet.edge;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let third = self.triangles[owner].iter().copied().find(|&v| v != a && v != b).expect("owner triangle");
        let pc = self.vertices[third];
        let (dx, dy) = (pb.x - pa.x, pb.y - pa.y);
        let len = (dx * dx + dy * dy).sqrt();
        let mut n = [dy / len, -dx / len];
        if n[0] * (pc.x - pa.x) + n[1] * (pc.y - pa.y) > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// For every boundary facet, the triangle owning its edge.
    pub fn facet_owners(&self) -> Vec<usize> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for [a, b] in LOCAL_EDGES {
                owner.insert(edge_key(tri[a], tri[b]), t);
            }
        }
        self.boundary_facets.iter().map(|f| owner[&edge_key(f.edge[0], f.edge[1])]).collect()
    }

    pub fn topology(&self) -> Topology {
        let table = self.edge_table();
        let nt = self.triangles.len();

        let mut tri_sets = DisjointSets::new(nt);
        let mut first_owner: HashMap<usize, usize> = HashMap::new();
        for (t, edges) in table.triangle_edges.iter().enumerate() {
            for &e in edges {
                match first_owner.get(&e) {
                    Some(&o) => tri_sets.union(o, t),
                    None => {
                        first_owner.insert(e, t);
                    }
                }
            }
        }

        let mut uses = vec![0u8; table.edges.len()];
        for edges in &table.triangle_edges {
            for &e in edges {
                uses[e] += 1;
            }
        }
        let mut vert_sets = DisjointSets::new(self.vertices.len());
        let mut on_boundary = vec![false; self.vertices.len()];
        for (e, &[a, b]) in table.edges.iter().enumerate() {
            if uses[e] == 1 {
                vert_sets.union(a, b);
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        let loops = (0..self.vertices.len()).filter(|&v| on_boundary[v] && vert_sets.find(v) == v).count();

        Topology {
            vertices: self.vertices.len(),
            edges: table.edges.len(),
            triangles: nt,
            components: tri_sets.roots(),
            boundary_loops: loops,
        }
    }

    /// Checks `V - E + T = components - holes`, the Euler relation for a
    /// planar region.
    pub fn check_euler(&self) -> Result<Topology, MeshError> {
        let topo = self.topology();
        let expected = topo.components as i64 - topo.holes() as i64;
        if topo.euler_characteristic() != expected {
            return Err(MeshError::EulerMismatch { found: topo.euler_characteristic(), expected });
        }
        Ok(topo)
    }
}

#[derive(Debug, Clone)]
pub struct EdgeTable {
    pub edges: Vec<[usize; 2]>,
    pub triangle_edges: Vec<[usize; 3]>,
    index: HashMap<(usize, usize), usize>,
}

impl EdgeTable {
    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&edge_key(a, b)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub components: usize,
    pub boundary_loops: usize,
}

impl Topology {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.triangles as i64
    }

    /// Inner boundary loops; each component has one outer loop.
    pub fn holes(&self) -> usize {
        self.boundary_loops.saturating_sub(self.components)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn roots(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}
