use std::collections::HashMap;

use super::{edge_key, BoundaryFacet, BoundaryTag, Mesh, RegionTag, LOCAL_EDGES};

/// Correspondence between a fluid submesh and the mesh it was cut from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmeshMap {
    /// Submesh vertex -> parent vertex.
    pub vertex_to_parent: Vec<usize>,
    /// Submesh triangle -> parent triangle.
    pub triangle_to_parent: Vec<usize>,
}

impl SubmeshMap {
    fn identity(mesh: &Mesh) -> Self {
        SubmeshMap {
            vertex_to_parent: (0..mesh.num_vertices()).collect(),
            triangle_to_parent: (0..mesh.num_triangles()).collect(),
        }
    }

    /// Parent triangle -> submesh triangle, `None` for removed triangles.
    pub fn parent_to_triangle(&self, parent_triangles: usize) -> Vec<Option<usize>> {
        let mut inverse = vec![None; parent_triangles];
        for (t, &p) in self.triangle_to_parent.iter().enumerate() {
            inverse[p] = Some(t);
        }
        inverse
    }
}

/// Removes obstacle triangles. Edges between fluid and obstacle triangles
/// become `ObstacleBoundary(id)` facets; vertices and triangles keep their
/// parent order and local vertex order, so geometry is bit-identical.
pub fn extract_fluid_submesh(mesh: &Mesh) -> (Mesh, SubmeshMap) {
    if mesh.regions().iter().all(|r| *r == RegionTag::Fluid) {
        return (mesh.clone(), SubmeshMap::identity(mesh));
    }

    let fluid: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| mesh.regions()[t] == RegionTag::Fluid).collect();
    let mut new_index = vec![usize::MAX; mesh.num_vertices()];
    for &t in &fluid {
        for &v in &mesh.triangles()[t] {
            new_index[v] = 0;
        }
    }
    let mut vertex_to_parent = Vec::new();
    for v in 0..mesh.num_vertices() {
        if new_index[v] == 0 {
            new_index[v] = vertex_to_parent.len();
            vertex_to_parent.push(v);
        }
    }
    let vertices = vertex_to_parent.iter().map(|&v| mesh.vertices()[v]).collect();
    let triangles = fluid.iter().map(|&t| mesh.triangles()[t].map(|v| new_index[v])).collect();

    // which regions touch each parent edge
    let mut sides: HashMap<(usize, usize), (Option<usize>, Option<u32>)> = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for [a, b] in LOCAL_EDGES {
            let entry = sides.entry(edge_key(tri[a], tri[b])).or_default();
            match mesh.regions()[t] {
                RegionTag::Fluid => entry.0 = Some(t),
                RegionTag::Obstacle(id) => entry.1 = Some(id),
            }
        }
    }

    let mut facets: Vec<BoundaryFacet> = mesh
        .boundary_facets()
        .iter()
        .filter(|f| matches!(sides.get(&edge_key(f.edge[0], f.edge[1])), Some((Some(_), _))))
        .map(|f| BoundaryFacet { edge: f.edge.map(|v| new_index[v]), tag: f.tag })
        .collect();
    let mut interface: Vec<((usize, usize), u32)> = sides
        .iter()
        .filter_map(|(&e, &(fluid, obstacle))| match (fluid, obstacle) {
            (Some(_), Some(id)) => Some((e, id)),
            _ => None,
        })
        .collect();
    interface.sort_unstable();
    facets.extend(interface.into_iter().map(|((a, b), id)| BoundaryFacet {
        edge: [new_index[a], new_index[b]],
        tag: BoundaryTag::ObstacleBoundary(id),
    }));

    let regions = vec![RegionTag::Fluid; fluid.len()];
    let sub = Mesh::new(vertices, triangles, facets, regions).expect("fluid submesh of a valid mesh is valid");
    (sub, SubmeshMap { vertex_to_parent, triangle_to_parent: fluid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_channel_mesh, AxisRect};

    #[test]
    fn no_obstacles_gives_identity() {
        let mesh = generate_channel_mesh(AxisRect::new(0.0, 1.0, 0.0, 1.0), &[], 0.5).unwrap();
        let (sub, map) = extract_fluid_submesh(&mesh);
        assert_eq!(sub, mesh);
        assert_eq!(map.vertex_to_parent, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn corner_cell_obstacle_on_two_by_two_grid() {
        // the upper-right cell of the 2x2 grid; its two interior edges become
        // obstacle boundary, its two outer edges disappear with it
        let cell = AxisRect::new(0.5, 1.0, 0.5, 1.0);
        let mesh = generate_channel_mesh(AxisRect::new(0.0, 1.0, 0.0, 1.0), &[cell], 0.5).unwrap();
        let (sub, map) = extract_fluid_submesh(&mesh);
        assert_eq!(sub.num_triangles(), 6);
        let new: Vec<_> = sub.boundary_facets().iter().filter(|f| f.tag == BoundaryTag::ObstacleBoundary(1)).collect();
        assert_eq!(new.len(), 2);
        assert_eq!(sub.boundary_facets().len(), 8 - 2 + 2);
        // vertex (1, 1) belongs only to the removed cell
        assert_eq!(sub.num_vertices(), 8);
        assert!(!map.vertex_to_parent.contains(&8));
    }

    #[test]
    fn areas_are_preserved_exactly() {
        let mesh =
            generate_channel_mesh(AxisRect::new(-2.0, 2.0, -1.0, 1.0), &[AxisRect::new(-1.1, -0.9, 0.4, 1.0)], 0.1)
                .unwrap();
        let (sub, map) = extract_fluid_submesh(&mesh);
        assert_eq!(sub.num_triangles(), mesh.num_triangles() - mesh.obstacle_triangles().len());
        for (t, &p) in map.triangle_to_parent.iter().enumerate() {
            assert_eq!(sub.triangle_area(t).to_bits(), mesh.triangle_area(p).to_bits());
            let mapped: Vec<_> = sub.triangles()[t].iter().map(|&v| map.vertex_to_parent[v]).collect();
            assert_eq!(mapped, mesh.triangles()[p]);
        }
    }
}
