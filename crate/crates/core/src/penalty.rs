//! Obstacle geometry and the element-wise penalty field `R * chi`.

use thiserror::Error;

use crate::mesh::{AxisRect, Mesh, Point2, RegionTag};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Obstacle {
    Rect(AxisRect),
    Disk { center: Point2, radius: f64 },
}

impl Obstacle {
    /// Closed-set membership with an absolute tolerance `tol` (positive
    /// values enlarge the set).
    fn contains_tol(&self, p: Point2, tol: f64) -> bool {
        match *self {
            Obstacle::Rect(r) => {
                p.x >= r.xmin - tol && p.x <= r.xmax + tol && p.y >= r.ymin - tol && p.y <= r.ymax + tol
            }
            Obstacle::Disk { center, radius } => (p.x - center.x).hypot(p.y - center.y) <= radius + tol,
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.contains_tol(p, 0.0)
    }

    fn scale(&self) -> f64 {
        match *self {
            Obstacle::Rect(r) => r.diameter(),
            Obstacle::Disk { radius, .. } => 2.0 * radius,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Obstacle::Rect(r) => r.area(),
            Obstacle::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }
}

/// Where the obstacles are.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ObstacleSet {
    /// Analytic shapes; obstacle `i` gets id `i + 1`.
    Primitives(Vec<Obstacle>),
    /// The mesh region tags are authoritative.
    MeshRegions,
}

#[derive(Debug, Error, PartialEq)]
pub enum PenaltyError {
    #[error("penalty magnitude must be finite and non-negative, got {0}")]
    InvalidMagnitude(f64),
    #[error("triangle {triangle} straddles the boundary of obstacle {obstacle}")]
    Straddling { triangle: usize, obstacle: usize },
    #[error("obstacle {0} has non-positive measure")]
    EmptyObstacle(usize),
}

impl ObstacleSet {
    /// Closed-set membership. For [`ObstacleSet::MeshRegions`] the point is
    /// located in the mesh and the containing triangle's tag decides.
    pub fn contains(&self, mesh: &Mesh, p: Point2) -> bool {
        match self {
            ObstacleSet::Primitives(list) => list.iter().any(|o| o.contains(p)),
            ObstacleSet::MeshRegions => (0..mesh.num_triangles())
                .filter(|&t| mesh.regions()[t].is_obstacle())
                .any(|t| point_in_triangle(mesh.triangle_points(t), p)),
        }
    }

    /// Region tag per triangle. Primitive sets use the centroid and require
    /// all three vertices to agree, so the mesh must conform to the obstacle
    /// boundaries.
    pub fn classify(&self, mesh: &Mesh) -> Result<Vec<RegionTag>, PenaltyError> {
        let list = match self {
            ObstacleSet::MeshRegions => return Ok(mesh.regions().to_vec()),
            ObstacleSet::Primitives(list) => list,
        };
        for (k, o) in list.iter().enumerate() {
            if !(o.area() > 0.0) {
                return Err(PenaltyError::EmptyObstacle(k));
            }
        }
        let tol = 1e-9 * mesh.diameter();
        let mut tags = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let c = mesh.centroid(t);
            let pts = mesh.triangle_points(t);
            let owner = list.iter().position(|o| o.contains(c));
            for (k, o) in list.iter().enumerate() {
                let inner_tol = -tol.min(1e-6 * o.scale());
                let straddles = if owner == Some(k) {
                    !pts.iter().all(|&p| o.contains_tol(p, tol))
                } else {
                    // a vertex strictly inside an obstacle the centroid is not in
                    pts.iter().any(|&p| o.contains_tol(p, inner_tol))
                };
                if straddles {
                    return Err(PenaltyError::Straddling { triangle: t, obstacle: k + 1 });
                }
            }
            tags.push(owner.map_or(RegionTag::Fluid, |k| RegionTag::Obstacle(k as u32 + 1)));
        }
        Ok(tags)
    }
}

fn point_in_triangle(tri: [Point2; 3], p: Point2) -> bool {
    let [a, b, c] = tri;
    let d0 = crate::mesh::signed_area(a, b, p);
    let d1 = crate::mesh::signed_area(b, c, p);
    let d2 = crate::mesh::signed_area(c, a, p);
    d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0
}

/// `psi = R` on obstacle triangles and exactly zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyField {
    magnitude: f64,
    indicator: Vec<bool>,
}

impl PenaltyField {
    pub fn from_indicator(magnitude: f64, indicator: Vec<bool>) -> Self {
        PenaltyField { magnitude, indicator }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn len(&self) -> usize {
        self.indicator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicator.is_empty()
    }

    pub fn value(&self, t: usize) -> f64 {
        if self.indicator[t] {
            self.magnitude
        } else {
            0.0
        }
    }

    pub fn obstacle_triangles(&self) -> Vec<usize> {
        (0..self.indicator.len()).filter(|&t| self.indicator[t]).collect()
    }

    /// Same indicator with another magnitude.
    pub fn with_magnitude(&self, magnitude: f64) -> Result<Self, PenaltyError> {
        check_magnitude(magnitude)?;
        Ok(PenaltyField { magnitude, indicator: self.indicator.clone() })
    }
}

fn check_magnitude(r: f64) -> Result<(), PenaltyError> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(PenaltyError::InvalidMagnitude(r))
    }
}

pub fn build_penalty_field(mesh: &Mesh, set: &ObstacleSet, magnitude: f64) -> Result<PenaltyField, PenaltyError> {
    check_magnitude(magnitude)?;
    let tags = set.classify(mesh)?;
    Ok(PenaltyField { magnitude, indicator: tags.iter().map(|r| r.is_obstacle()).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_channel_mesh;

    const CHANNEL: AxisRect = AxisRect::new(-2.0, 2.0, -1.0, 1.0);
    const BLOCK: AxisRect = AxisRect::new(-1.1, -0.9, 0.4, 1.0);

    #[test]
    fn membership() {
        let mesh = generate_channel_mesh(CHANNEL, &[], 0.5).unwrap();
        let rect = ObstacleSet::Primitives(vec![Obstacle::Rect(BLOCK)]);
        assert!(rect.contains(&mesh, Point2::new(-1.0, 0.7)));
        assert!(rect.contains(&mesh, Point2::new(-1.1, 0.7)));
        assert!(rect.contains(&mesh, Point2::new(-1.0, 1.0)));
        assert!(!rect.contains(&mesh, Point2::new(-0.8, 0.7)));
        let disk = ObstacleSet::Primitives(vec![Obstacle::Disk { center: Point2::new(1.0, 0.5), radius: 0.3 }]);
        assert!(!disk.contains(&mesh, Point2::new(1.31, 0.5)));
        assert!(disk.contains(&mesh, Point2::new(1.0, 0.2)));
    }

    #[test]
    fn mesh_regions_membership() {
        let mesh = generate_channel_mesh(CHANNEL, &[BLOCK], 0.05).unwrap();
        let set = ObstacleSet::MeshRegions;
        assert!(set.contains(&mesh, Point2::new(-1.0, 0.7)));
        assert!(set.contains(&mesh, Point2::new(-0.9, 0.7)));
        assert!(!set.contains(&mesh, Point2::new(0.0, 0.0)));
    }

    #[test]
    fn indicator_matches_tags() {
        let mesh = generate_channel_mesh(CHANNEL, &[BLOCK], 0.05).unwrap();
        let from_prims = build_penalty_field(&mesh, &ObstacleSet::Primitives(vec![Obstacle::Rect(BLOCK)]), 1e6).unwrap();
        let from_tags = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 1e6).unwrap();
        assert_eq!(from_prims, from_tags);
        for t in 0..mesh.num_triangles() {
            assert_eq!(from_tags.indicator()[t], mesh.regions()[t].is_obstacle());
            assert_eq!(from_tags.value(t), if from_tags.indicator()[t] { 1e6 } else { 0.0 });
        }
        let area: f64 = from_tags.obstacle_triangles().iter().map(|&t| mesh.triangle_area(t)).sum();
        assert!((area - BLOCK.area()).abs() <= 0.02 * BLOCK.area());
    }

    #[test]
    fn zero_magnitude_is_identically_zero() {
        let mesh = generate_channel_mesh(CHANNEL, &[BLOCK], 0.05).unwrap();
        let psi = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 0.0).unwrap();
        assert!((0..psi.len()).all(|t| psi.value(t) == 0.0));
    }

    #[test]
    fn doubling_r_doubles_the_field() {
        let mesh = generate_channel_mesh(CHANNEL, &[BLOCK], 0.1).unwrap();
        let a = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 37.5).unwrap();
        let b = build_penalty_field(&mesh, &ObstacleSet::MeshRegions, 75.0).unwrap();
        for t in 0..a.len() {
            assert_eq!(b.value(t), 2.0 * a.value(t));
        }
    }

    #[test]
    fn straddling_triangle_is_rejected() {
        let mesh = generate_channel_mesh(CHANNEL, &[], 0.1).unwrap();
        let off = ObstacleSet::Primitives(vec![Obstacle::Rect(AxisRect::new(-1.13, -0.87, 0.4, 1.0))]);
        assert!(matches!(build_penalty_field(&mesh, &off, 1.0), Err(PenaltyError::Straddling { .. })));
        let disk = ObstacleSet::Primitives(vec![Obstacle::Disk { center: Point2::new(1.0, 0.5), radius: 0.3 }]);
        assert!(matches!(build_penalty_field(&mesh, &disk, 1.0), Err(PenaltyError::Straddling { .. })));
    }

    #[test]
    fn negative_magnitude_is_rejected() {
        let mesh = generate_channel_mesh(CHANNEL, &[], 0.5).unwrap();
        assert_eq!(
            build_penalty_field(&mesh, &ObstacleSet::MeshRegions, -1.0),
            Err(PenaltyError::InvalidMagnitude(-1.0))
        );
    }
}
