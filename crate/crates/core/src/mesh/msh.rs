//! Gmsh MSH 2.2 ASCII reader and writer.
//!
//! Only 2-node lines (type 1) and 3-node triangles (type 2) are accepted.
//! Physical tags are translated through a [`TagDictionary`]: lines must map to
//! a [`BoundaryTag`], triangles to a [`RegionTag`].

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{BoundaryFacet, BoundaryTag, Mesh, MeshError, Point2, RegionTag};

#[derive(Debug, Error, PartialEq)]
pub enum MshError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("unsupported MSH version {0} (only 2.2 ASCII)")]
    UnsupportedVersion(String),
    #[error("unsupported element type {kind} (element {element})")]
    UnsupportedElementType { element: i64, kind: i64 },
    #[error("unknown physical tag {tag} on a {dim}-dimensional element")]
    UnknownPhysicalTag { dim: u8, tag: i64 },
    #[error("element {element} references unknown node {node}")]
    UnknownNode { element: i64, node: i64 },
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// What a physical group denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicalKind {
    Boundary(BoundaryTag),
    Region(RegionTag),
}

/// Maps `(dimension, physical tag)` pairs to boundary or region tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagDictionary {
    map: HashMap<(u8, i64), PhysicalKind>,
}

impl TagDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn boundary(mut self, tag: i64, value: BoundaryTag) -> Self {
        self.map.insert((1, tag), PhysicalKind::Boundary(value));
        self
    }

    pub fn region(mut self, tag: i64, value: RegionTag) -> Self {
        self.map.insert((2, tag), PhysicalKind::Region(value));
        self
    }

    pub fn get(&self, dim: u8, tag: i64) -> Option<PhysicalKind> {
        self.map.get(&(dim, tag)).copied()
    }

    /// Builds a dictionary from `$PhysicalNames` using the naming convention
    /// `inflow`, `outflow`, `wall`, `obstacle_boundaryN` for lines and
    /// `fluid`, `obstacleN` for surfaces. Unrecognized names are skipped.
    pub fn from_physical_names(names: &[(u8, i64, String)]) -> Self {
        let mut dict = TagDictionary::new();
        for (dim, tag, name) in names {
            let kind = match (*dim, name.as_str()) {
                (1, "inflow") => Some(PhysicalKind::Boundary(BoundaryTag::Inflow)),
                (1, "outflow") => Some(PhysicalKind::Boundary(BoundaryTag::Outflow)),
                (1, "wall") => Some(PhysicalKind::Boundary(BoundaryTag::Wall)),
                (1, n) => n
                    .strip_prefix("obstacle_boundary")
                    .and_then(|id| id.parse().ok())
                    .map(|id| PhysicalKind::Boundary(BoundaryTag::ObstacleBoundary(id))),
                (2, "fluid") => Some(PhysicalKind::Region(RegionTag::Fluid)),
                (2, n) => n
                    .strip_prefix("obstacle")
                    .and_then(|id| id.parse().ok())
                    .map(|id| PhysicalKind::Region(RegionTag::Obstacle(id))),
                _ => None,
            };
            if let Some(kind) = kind {
                dict.map.insert((*dim, *tag), kind);
            }
        }
        dict
    }
}

/// Raw contents of an MSH 2.2 file.
#[derive(Debug, Clone, PartialEq)]
pub struct MshFile {
    pub physical_names: Vec<(u8, i64, String)>,
    pub nodes: Vec<(i64, Point2)>,
    pub elements: Vec<MshElement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MshElement {
    pub id: i64,
    pub kind: i64,
    pub physical: i64,
    pub nodes: Vec<i64>,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some(l);
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<&'a str, MshError> {
        self.next_line().ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))
    }

    fn expect_exact(&mut self, header: &str) -> Result<(), MshError> {
        let l = self.expect(header)?;
        if l != header {
            return Err(self.err(format!("expected {header}, found {l:?}")));
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize, MshError> {
        let l = self.expect("a count")?;
        l.parse().map_err(|_| self.err(format!("bad count {l:?}")))
    }

    fn err(&self, message: String) -> MshError {
        MshError::Malformed { line: self.last, message }
    }
}

fn parse_num<T: std::str::FromStr>(lines: &Lines<'_>, tok: Option<&str>) -> Result<T, MshError> {
    let tok = tok.ok_or_else(|| lines.err("missing field".into()))?;
    tok.parse().map_err(|_| lines.err(format!("bad number {tok:?}")))
}

impl MshFile {
    pub fn parse(bytes: &[u8]) -> Result<MshFile, MshError> {
        let text = std::str::from_utf8(bytes).map_err(|_| MshError::Encoding)?;
        let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
        let mut format_seen = false;
        let mut physical_names = Vec::new();
        let mut nodes = None;
        let mut elements = None;

        while let Some(header) = lines.next_line() {
            match header {
                "$MeshFormat" => {
                    let l = lines.expect("format line")?;
                    let mut it = l.split_whitespace();
                    let version = it.next().unwrap_or("");
                    let file_type = it.next().unwrap_or("");
                    if version != "2.2" || file_type != "0" {
                        return Err(MshError::UnsupportedVersion(l.to_string()));
                    }
                    lines.expect_exact("$EndMeshFormat")?;
                    format_seen = true;
                }
                "$PhysicalNames" => {
                    let n = lines.count()?;
                    for _ in 0..n {
                        let l = lines.expect("physical name")?;
                        let mut it = l.splitn(3, char::is_whitespace);
                        let dim: u8 = parse_num(&lines, it.next())?;
                        let tag: i64 = parse_num(&lines, it.next())?;
                        let name = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                        physical_names.push((dim, tag, name));
                    }
                    lines.expect_exact("$EndPhysicalNames")?;
                }
                "$Nodes" => {
                    let n = lines.count()?;
                    let mut list = Vec::with_capacity(n);
                    for _ in 0..n {
                        let l = lines.expect("node")?;
                        let mut it = l.split_whitespace();
                        let id: i64 = parse_num(&lines, it.next())?;
                        let x: f64 = parse_num(&lines, it.next())?;
                        let y: f64 = parse_num(&lines, it.next())?;
                        let _z: f64 = parse_num(&lines, it.next())?;
                        list.push((id, Point2::new(x, y)));
                    }
                    lines.expect_exact("$EndNodes")?;
                    nodes = Some(list);
                }
                "$Elements" => {
                    let n = lines.count()?;
                    let mut list = Vec::with_capacity(n);
                    for _ in 0..n {
                        let l = lines.expect("element")?;
                        let fields: Vec<i64> = l
                            .split_whitespace()
                            .map(|t| t.parse().map_err(|_| lines.err(format!("bad number {t:?}"))))
                            .collect::<Result<_, _>>()?;
                        if fields.len() < 3 {
                            return Err(lines.err("element line too short".into()));
                        }
                        let (id, kind, ntags) = (fields[0], fields[1], fields[2]);
                        let expected_nodes = match kind {
                            1 => 2,
                            2 => 3,
                            _ => return Err(MshError::UnsupportedElementType { element: id, kind }),
                        };
                        if ntags < 1 || fields.len() != 3 + ntags as usize + expected_nodes {
                            return Err(lines.err(format!("element {id} has the wrong number of fields")));
                        }
                        let physical = fields[3];
                        let nodes = fields[3 + ntags as usize..].to_vec();
                        list.push(MshElement { id, kind, physical, nodes });
                    }
                    lines.expect_exact("$EndElements")?;
                    elements = Some(list);
                }
                other if other.starts_with('$') && !other.starts_with("$End") => {
                    // unknown section: skip to its end marker
                    let end = format!("$End{}", &other[1..]);
                    loop {
                        let l = lines.expect(&end)?;
                        if l == end {
                            break;
                        }
                    }
                }
                other => return Err(lines.err(format!("unexpected line {other:?} outside a section"))),
            }
        }

        if !format_seen {
            return Err(MshError::MissingSection("$MeshFormat"));
        }
        Ok(MshFile {
            physical_names,
            nodes: nodes.ok_or(MshError::MissingSection("$Nodes"))?,
            elements: elements.ok_or(MshError::MissingSection("$Elements"))?,
        })
    }

    /// Converts to a validated [`Mesh`]. Nodes not referenced by any element
    /// are dropped; the remaining ones keep their file order.
    pub fn to_mesh(&self, dict: &TagDictionary) -> Result<Mesh, MshError> {
        let node_index: HashMap<i64, usize> = self.nodes.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
        let mut used = vec![false; self.nodes.len()];
        let lookup = |e: &MshElement, node: i64| {
            node_index.get(&node).copied().ok_or(MshError::UnknownNode { element: e.id, node })
        };
        for e in &self.elements {
            for &n in &e.nodes {
                used[lookup(e, n)?] = true;
            }
        }
        let mut renumber = vec![usize::MAX; self.nodes.len()];
        let mut vertices = Vec::new();
        for (i, (_, p)) in self.nodes.iter().enumerate() {
            if used[i] {
                renumber[i] = vertices.len();
                vertices.push(*p);
            }
        }

        let mut triangles = Vec::new();
        let mut regions = Vec::new();
        let mut facets = Vec::new();
        for e in &self.elements {
            let dim = e.kind as u8;
            let kind = dict.get(dim, e.physical).ok_or(MshError::UnknownPhysicalTag { dim, tag: e.physical })?;
            let v: Vec<usize> = e.nodes.iter().map(|&n| renumber[node_index[&n]]).collect();
            match (e.kind, kind) {
                (1, PhysicalKind::Boundary(tag)) => facets.push(BoundaryFacet { edge: [v[0], v[1]], tag }),
                (2, PhysicalKind::Region(tag)) => {
                    triangles.push([v[0], v[1], v[2]]);
                    regions.push(tag);
                }
                _ => return Err(MshError::UnknownPhysicalTag { dim, tag: e.physical }),
            }
        }
        Ok(Mesh::new(vertices, triangles, facets, regions)?)
    }
}

/// Parses an MSH 2.2 ASCII file into a validated mesh.
pub fn parse_msh(bytes: &[u8], dict: &TagDictionary) -> Result<Mesh, MshError> {
    MshFile::parse(bytes)?.to_mesh(dict)
}

/// Parses an MSH file whose `$PhysicalNames` follow the naming convention of
/// [`TagDictionary::from_physical_names`].
pub fn parse_msh_named(bytes: &[u8]) -> Result<Mesh, MshError> {
    let file = MshFile::parse(bytes)?;
    let dict = TagDictionary::from_physical_names(&file.physical_names);
    file.to_mesh(&dict)
}

fn boundary_physical(tag: BoundaryTag) -> i64 {
    match tag {
        BoundaryTag::Inflow => 1,
        BoundaryTag::Outflow => 2,
        BoundaryTag::Wall => 3,
        BoundaryTag::ObstacleBoundary(id) => 100 + id as i64,
    }
}

fn region_physical(tag: RegionTag) -> i64 {
    match tag {
        RegionTag::Fluid => 10,
        RegionTag::Obstacle(id) => 10 + id as i64,
    }
}

/// Writes a mesh as MSH 2.2 ASCII with conventional physical names, so the
/// output reparses with [`parse_msh_named`]. Coordinates use the shortest
/// representation that round-trips exactly.
pub fn write_msh(mesh: &Mesh) -> String {
    let mut boundary_tags: Vec<BoundaryTag> = mesh.boundary_facets().iter().map(|f| f.tag).collect();
    boundary_tags.sort_unstable();
    boundary_tags.dedup();
    let mut region_tags: Vec<RegionTag> = mesh.regions().to_vec();
    region_tags.sort_unstable();
    region_tags.dedup();

    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    let _ = writeln!(out, "$PhysicalNames\n{}", boundary_tags.len() + region_tags.len());
    for t in &boundary_tags {
        let _ = writeln!(out, "1 {} \"{}\"", boundary_physical(*t), t);
    }
    for t in &region_tags {
        let _ = writeln!(out, "2 {} \"{}\"", region_physical(*t), t);
    }
    out.push_str("$EndPhysicalNames\n");

    let _ = writeln!(out, "$Nodes\n{}", mesh.num_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?} 0", i + 1, p.x, p.y);
    }
    out.push_str("$EndNodes\n");

    let n = mesh.boundary_facets().len() + mesh.num_triangles();
    let _ = writeln!(out, "$Elements\n{n}");
    let mut id = 1;
    for f in mesh.boundary_facets() {
        let phys = boundary_physical(f.tag);
        let _ = writeln!(out, "{id} 1 2 {phys} {phys} {} {}", f.edge[0] + 1, f.edge[1] + 1);
        id += 1;
    }
    for (tri, region) in mesh.triangles().iter().zip(mesh.regions()) {
        let phys = region_physical(*region);
        let _ = writeln!(out, "{id} 2 2 {phys} {phys} {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
        id += 1;
    }
    out.push_str("$EndElements\n");
    out
}
