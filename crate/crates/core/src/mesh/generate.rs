use super::{BoundaryFacet, BoundaryTag, Mesh, MeshError, Point2, RegionTag};

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisRect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl AxisRect {
    pub const fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        AxisRect { xmin, xmax, ymin, ymax }
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn diameter(&self) -> f64 {
        (self.xmax - self.xmin).hypot(self.ymax - self.ymin)
    }
}

/// Snaps `value` to the grid line `lo + i * (hi - lo) / n`.
fn snap(value: f64, lo: f64, hi: f64, n: usize, tol: f64) -> Option<usize> {
    let i = ((value - lo) / (hi - lo) * n as f64).round();
    if i < 0.0 || i > n as f64 {
        return None;
    }
    let i = i as usize;
    (grid(lo, hi, n, i) - value).abs().le(&tol).then_some(i)
}

fn grid(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / n as f64
    }
}

/// Structured triangulation of `domain` with cells of size about `h`, each
/// split along its lower-left to upper-right diagonal. Cells inside the
/// `i`-th obstacle rectangle get `Obstacle(i + 1)`. Edges on `x = xmin` are
/// tagged inflow, on `x = xmax` outflow, and the rest of the outer boundary
/// wall.
pub fn generate_channel_mesh(domain: AxisRect, obstacles: &[AxisRect], h: f64) -> Result<Mesh, MeshError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("edge length h must be positive, got {h}")));
    }
    let (lx, ly) = (domain.xmax - domain.xmin, domain.ymax - domain.ymin);
    if !(lx > 0.0 && ly > 0.0) {
        return Err(MeshError::InvalidParameter("channel must have positive extent".into()));
    }
    let nx = ((lx / h).round() as usize).max(1);
    let ny = ((ly / h).round() as usize).max(1);
    let tol = 1e-12 * domain.diameter();

    let mut cell_ranges = Vec::with_capacity(obstacles.len());
    for (k, r) in obstacles.iter().enumerate() {
        if !(r.xmax > r.xmin && r.ymax > r.ymin) {
            return Err(MeshError::NotSnappable { index: k, reason: "empty rectangle".into() });
        }
        if r.xmin < domain.xmin - tol
            || r.xmax > domain.xmax + tol
            || r.ymin < domain.ymin - tol
            || r.ymax > domain.ymax + tol
        {
            return Err(MeshError::RectangleOutsideDomain(k));
        }
        let not_snappable = |what: &str, v: f64| MeshError::NotSnappable {
            index: k,
            reason: format!("{what} = {v} is off the grid (nx = {nx}, ny = {ny})"),
        };
        let i0 = snap(r.xmin, domain.xmin, domain.xmax, nx, tol).ok_or_else(|| not_snappable("xmin", r.xmin))?;
        let i1 = snap(r.xmax, domain.xmin, domain.xmax, nx, tol).ok_or_else(|| not_snappable("xmax", r.xmax))?;
        let j0 = snap(r.ymin, domain.ymin, domain.ymax, ny, tol).ok_or_else(|| not_snappable("ymin", r.ymin))?;
        let j1 = snap(r.ymax, domain.ymin, domain.ymax, ny, tol).ok_or_else(|| not_snappable("ymax", r.ymax))?;
        for (other, &(a0, a1, b0, b1)) in cell_ranges.iter().enumerate() {
            if i0 < a1 && a0 < i1 && j0 < b1 && b0 < j1 {
                return Err(MeshError::OverlappingObstacles(other, k));
            }
        }
        cell_ranges.push((i0, i1, j0, j1));
    }

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point2::new(
                grid(domain.xmin, domain.xmax, nx, i),
                grid(domain.ymin, domain.ymax, ny, j),
            ));
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut regions = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let region = cell_ranges
                .iter()
                .position(|&(i0, i1, j0, j1)| (i0..i1).contains(&i) && (j0..j1).contains(&j))
                .map_or(RegionTag::Fluid, |k| RegionTag::Obstacle(k as u32 + 1));
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
            regions.push(region);
            regions.push(region);
        }
    }

    // counterclockwise walk around the outer boundary
    let mut facets = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        facets.push(BoundaryFacet { edge: [vid(i, 0), vid(i + 1, 0)], tag: BoundaryTag::Wall });
    }
    for j in 0..ny {
        facets.push(BoundaryFacet { edge: [vid(nx, j), vid(nx, j + 1)], tag: BoundaryTag::Outflow });
    }
    for i in (0..nx).rev() {
        facets.push(BoundaryFacet { edge: [vid(i + 1, ny), vid(i, ny)], tag: BoundaryTag::Wall });
    }
    for j in (0..ny).rev() {
        facets.push(BoundaryFacet { edge: [vid(0, j + 1), vid(0, j)], tag: BoundaryTag::Inflow });
    }

    Mesh::new(vertices, triangles, facets, regions)
}
