//! Flat `key = value` run configuration and the mesh manifest record.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::solver::Equation;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
    #[error("give either a mesh file or a preset, not both")]
    TwoMeshSources,
    #[error("reading config {path}: {message}")]
    Io { path: String, message: String },
}

/// Every field mirrors a CLI flag of the same name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub equation: Option<Equation>,
    pub r: Option<f64>,
    pub rmin: Option<f64>,
    pub rmax: Option<f64>,
    pub rsteps: Option<u32>,
    pub nu: Option<f64>,
    pub u: Option<f64>,
    pub mesh: Option<PathBuf>,
    pub preset: Option<String>,
    pub h: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn parse_equation(s: &str) -> Option<Equation> {
    match s {
        "stokes" => Some(Equation::Stokes),
        "navier-stokes" => Some(Equation::NavierStokes),
        _ => None,
    }
}

impl RunConfig {
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue { line, key: key.to_string(), value: value.to_string() };
            let float = || value.parse::<f64>().map_err(|_| bad());
            match key {
                "equation" => cfg.equation = Some(parse_equation(value).ok_or_else(bad)?),
                "R" | "r" => cfg.r = Some(float()?),
                "rmin" => cfg.rmin = Some(float()?),
                "rmax" => cfg.rmax = Some(float()?),
                "rsteps" => cfg.rsteps = Some(value.parse().map_err(|_| bad())?),
                "nu" => cfg.nu = Some(float()?),
                "U" | "u" => cfg.u = Some(float()?),
                "mesh" => cfg.mesh = Some(PathBuf::from(value)),
                "preset" => cfg.preset = Some(value.to_string()),
                "h" => cfg.h = Some(float()?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Fields set in `flags` win. A mesh file given on the command line
    /// replaces a preset from the file and vice versa.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        let (mesh, preset) = if flags.mesh.is_some() || flags.preset.is_some() {
            (flags.mesh, flags.preset)
        } else {
            (self.mesh, self.preset)
        };
        RunConfig {
            equation: flags.equation.or(self.equation),
            r: flags.r.or(self.r),
            rmin: flags.rmin.or(self.rmin),
            rmax: flags.rmax.or(self.rmax),
            rsteps: flags.rsteps.or(self.rsteps),
            nu: flags.nu.or(self.nu),
            u: flags.u.or(self.u),
            mesh,
            preset,
            h: flags.h.or(self.h),
            out: flags.out.or(self.out),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mesh.is_some() && self.preset.is_some() {
            return Err(ConfigError::TwoMeshSources);
        }
        Ok(())
    }
}

/// One line of a mesh manifest (JSON Lines).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshManifest {
    pub file: String,
    pub h: f64,
    pub nodes: usize,
    pub triangles: usize,
    pub boundary_lines: usize,
    /// Holes of the full channel mesh.
    pub holes: usize,
    /// Holes of the fluid region.
    pub fluid_holes: usize,
    pub obstacles: usize,
}

impl MeshManifest {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn parse_lines(text: &str) -> Result<Vec<MeshManifest>, serde_json::Error> {
        text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let file = RunConfig::parse("# study\nequation = navier-stokes\nrmax = 1e8\npreset = paper-channel\n\nnu=1\n").unwrap();
        assert_eq!(file.equation, Some(Equation::NavierStokes));
        assert_eq!(file.rmax, Some(1e8));
        let flags = RunConfig { rmax: Some(1e6), mesh: Some("a.msh".into()), ..Default::default() };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.rmax, Some(1e6));
        assert_eq!(merged.nu, Some(1.0));
        assert_eq!(merged.preset, None);
        assert!(merged.validate().is_ok());
    }

    #[test]
    fn config_errors() {
        assert_eq!(RunConfig::parse("nu 1"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(RunConfig::parse("speed = 3"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(RunConfig::parse("\nnu = fast"), Err(ConfigError::BadValue { line: 2, .. })));
        let both = RunConfig { mesh: Some("a".into()), preset: Some("p".into()), ..Default::default() };
        assert_eq!(both.validate(), Err(ConfigError::TwoMeshSources));
    }

    #[test]
    fn manifest_round_trip() {
        let m = MeshManifest {
            file: "x.msh".into(),
            h: 0.05,
            nodes: 10,
            triangles: 12,
            boundary_lines: 8,
            holes: 0,
            fluid_holes: 1,
            obstacles: 1,
        };
        let parsed = MeshManifest::parse_lines(&format!("{}\n", m.to_json_line())).unwrap();
        assert_eq!(parsed, vec![m]);
    }
}
