//! Legacy ASCII VTK output of flow fields on the triangle mesh.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::mesh::{Mesh, Point2};
use crate::penalty::PenaltyField;
use crate::solver::FlowSolution;

#[derive(Debug, Error)]
pub enum VtkError {
    #[error("{name} has {got} values for {expected} points")]
    Length { name: &'static str, got: usize, expected: usize },
    #[error("malformed VTK file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Point data on the mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkField {
    points: Vec<Point2>,
    cells: Vec<[usize; 3]>,
    velocity: Vec<[f64; 2]>,
    pressure: Vec<f64>,
    penalty: Vec<f64>,
}

impl VtkField {
    pub fn new(
        mesh: &Mesh,
        velocity: Vec<[f64; 2]>,
        pressure: Vec<f64>,
        penalty: Vec<f64>,
    ) -> Result<Self, VtkError> {
        let n = mesh.num_vertices();
        for (name, got) in [("velocity", velocity.len()), ("pressure", pressure.len()), ("penalty", penalty.len())] {
            if got != n {
                return Err(VtkError::Length { name, got, expected: n });
            }
        }
        Ok(VtkField { points: mesh.vertices().to_vec(), cells: mesh.triangles().to_vec(), velocity, pressure, penalty })
    }

    /// Vertex samples of the P2 velocity and P1 pressure. The penalty scalar
    /// at a vertex is the largest value on the triangles around it.
    pub fn from_solution(sol: &FlowSolution, penalty: Option<&PenaltyField>) -> Result<Self, VtkError> {
        let mesh = sol.space().mesh();
        let velocity = (0..mesh.num_vertices()).map(|v| sol.node_velocity(v)).collect();
        let mut psi = vec![0.0f64; mesh.num_vertices()];
        if let Some(field) = penalty {
            for (t, tri) in mesh.triangles().iter().enumerate() {
                for &v in tri {
                    psi[v] = psi[v].max(field.value(t));
                }
            }
        }
        VtkField::new(mesh, velocity, sol.pressure().to_vec(), psi)
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn velocity(&self) -> &[[f64; 2]] {
        &self.velocity
    }
}

pub fn format_vtk(field: &VtkField) -> String {
    let mut s = String::new();
    let n = field.points.len();
    let m = field.cells.len();
    s.push_str("# vtk DataFile Version 2.0\nbrinkman flow field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &field.points {
        let _ = writeln!(s, "{:e} {:e} 0", p.x, p.y);
    }
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for c in &field.cells {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("VECTORS velocity double\n");
    for u in &field.velocity {
        let _ = writeln!(s, "{:e} {:e} 0", u[0], u[1]);
    }
    for (name, values) in [("pressure", &field.pressure), ("penalty", &field.penalty)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values.iter() {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}

pub fn write_vtk(field: &VtkField, path: &Path) -> Result<(), VtkError> {
    std::fs::write(path, format_vtk(field))?;
    Ok(())
}

/// Counts and array names read back from a legacy VTK file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkSummary {
    pub points: usize,
    pub cells: usize,
    pub point_arrays: Vec<String>,
    /// Largest velocity magnitude in the `velocity` vectors.
    pub max_speed: f64,
}

/// Structural validator for files produced by [`write_vtk`].
pub fn read_vtk_summary(text: &str) -> Result<VtkSummary, VtkError> {
    let bad = |m: &str| VtkError::Malformed(m.to_string());
    let mut lines = text.lines();
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile Version")) {
        return Err(bad("missing version line"));
    }
    lines.next();
    if lines.next() != Some("ASCII") || lines.next() != Some("DATASET UNSTRUCTURED_GRID") {
        return Err(bad("expected ASCII UNSTRUCTURED_GRID"));
    }
    let count = |line: Option<&str>, key: &str| -> Result<usize, VtkError> {
        line.and_then(|l| l.strip_prefix(key))
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(&format!("expected {key}")))
    };
    let points = count(lines.next(), "POINTS ")?;
    for _ in 0..points {
        let l = lines.next().ok_or_else(|| bad("truncated POINTS"))?;
        if l.split_whitespace().filter_map(|v| v.parse::<f64>().ok()).count() != 3 {
            return Err(bad("point needs 3 coordinates"));
        }
    }
    let cells = count(lines.next(), "CELLS ")?;
    for _ in 0..cells {
        let l = lines.next().ok_or_else(|| bad("truncated CELLS"))?;
        let ids: Vec<usize> = l.split_whitespace().filter_map(|v| v.parse().ok()).collect();
        if ids.len() != 4 || ids[0] != 3 || ids[1..].iter().any(|&i| i >= points) {
            return Err(bad("invalid triangle cell"));
        }
    }
    if count(lines.next(), "CELL_TYPES ")? != cells {
        return Err(bad("CELL_TYPES count mismatch"));
    }
    for _ in 0..cells {
        if lines.next() != Some("5") {
            return Err(bad("cell type must be 5"));
        }
    }
    if count(lines.next(), "POINT_DATA ")? != points {
        return Err(bad("POINT_DATA count mismatch"));
    }
    let mut point_arrays = Vec::new();
    let mut max_speed = 0.0f64;
    while let Some(header) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        match parts.as_slice() {
            ["VECTORS", name, _] => {
                for _ in 0..points {
                    let v: Vec<f64> = lines
                        .next()
                        .ok_or_else(|| bad("truncated VECTORS"))?
                        .split_whitespace()
                        .map(|x| x.parse().map_err(|_| bad("bad vector component")))
                        .collect::<Result<_, _>>()?;
                    if v.len() != 3 {
                        return Err(bad("vector needs 3 components"));
                    }
                    if *name == "velocity" {
                        max_speed = max_speed.max(v[0].hypot(v[1]));
                    }
                }
                point_arrays.push(name.to_string());
            }
            ["SCALARS", name, ..] => {
                if lines.next() != Some("LOOKUP_TABLE default") {
                    return Err(bad("expected LOOKUP_TABLE"));
                }
                for _ in 0..points {
                    lines
                        .next()
                        .and_then(|l| l.trim().parse::<f64>().ok())
                        .ok_or_else(|| bad("bad scalar value"))?;
                }
                point_arrays.push(name.to_string());
            }
            [] => {}
            _ => return Err(bad(&format!("unexpected section {header}"))),
        }
    }
    Ok(VtkSummary { points, cells, point_arrays, max_speed })
}
