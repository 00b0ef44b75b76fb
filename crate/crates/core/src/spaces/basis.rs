//! P2 and P1 Lagrange bases on a triangle, in barycentric coordinates.
//!
//! Local P2 node order: the three vertices, then the midpoints of the local
//! edges (0,1), (1,2), (2,0).

use crate::mesh::Point2;

/// Affine triangle data: area and the constant gradients of the barycentric
/// coordinates.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub vertices: [Point2; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(vertices: [Point2; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        let grad_lambda = [
            [(p1.y - p2.y) / det, (p2.x - p1.x) / det],
            [(p2.y - p0.y) / det, (p0.x - p2.x) / det],
            [(p0.y - p1.y) / det, (p1.x - p0.x) / det],
        ];
        TriangleGeometry { vertices, area: 0.5 * det, grad_lambda }
    }

    /// Physical point at reference coordinates `(xi, eta)`.
    pub fn map(&self, xi: f64, eta: f64) -> Point2 {
        let [p0, p1, p2] = self.vertices;
        Point2::new(p0.x + xi * (p1.x - p0.x) + eta * (p2.x - p0.x), p0.y + xi * (p1.y - p0.y) + eta * (p2.y - p0.y))
    }

    /// Gradients of the six P2 shape functions at barycentric point `l`.
    pub fn p2_gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_lambda;
        let mut out = [[0.0; 2]; 6];
        for i in 0..3 {
            let s = 4.0 * l[i] - 1.0;
            out[i] = [s * g[i][0], s * g[i][1]];
        }
        for (k, [a, b]) in crate::mesh::LOCAL_EDGES.into_iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[a] * g[b][0] + l[b] * g[a][0]),
                4.0 * (l[a] * g[b][1] + l[b] * g[a][1]),
            ];
        }
        out
    }
}

/// Barycentric coordinates of reference point `(xi, eta)`.
pub fn barycentric(xi: f64, eta: f64) -> [f64; 3] {
    [1.0 - xi - eta, xi, eta]
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// P1 values are the barycentric coordinates themselves.
pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

/// Barycentric coordinates of the six P2 nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
