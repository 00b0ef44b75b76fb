//! Built-in problems: the channel with a rectangle and a disk obstacle, and
//! the same channel with the rectangle only.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::msh::parse_msh_named;
use crate::mesh::{generate_channel_mesh, AxisRect, Mesh, MeshError, MshError};
use crate::penalty::ObstacleSet;

/// Channel `(-2, 2) x (-1, 1)`.
pub const CHANNEL: AxisRect = AxisRect::new(-2.0, 2.0, -1.0, 1.0);
/// Rectangle obstacle attached to the upper wall.
pub const RECT_OBSTACLE: AxisRect = AxisRect::new(-1.1, -0.9, 0.4, 1.0);
/// Disk obstacle `(center x, center y, radius)`.
pub const DISK_OBSTACLE: (f64, f64, f64) = (1.0, 0.5, 0.3);

pub const PAPER_CHANNEL_H005: &str = include_str!("../../fixtures/paper_channel_h0.05.msh");
pub const PAPER_CHANNEL_H02: &str = include_str!("../../fixtures/paper_channel_h0.2.msh");
pub const DISK_CHANNEL_H025: &str = include_str!("../../fixtures/disk_channel_h0.25.msh");
pub const FIXTURE_MANIFEST: &str = include_str!("../../fixtures/manifest.jsonl");

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset {0:?} (expected paper-channel or rect-channel)")]
    Unknown(String),
    #[error("paper-channel meshes exist for h = 0.05 and h = 0.2, not {0}")]
    NoFixture(f64),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Msh(#[from] MshError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Unstructured fixture mesh with both obstacles.
    PaperChannel,
    /// Structured mesh from the built-in mesher, rectangle obstacle only.
    RectChannel,
}

impl FromStr for Preset {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-channel" => Ok(Preset::PaperChannel),
            "rect-channel" => Ok(Preset::RectChannel),
            other => Err(PresetError::Unknown(other.to_string())),
        }
    }
}

impl Preset {
    pub const DEFAULT_H: f64 = 0.05;

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperChannel => "paper-channel",
            Preset::RectChannel => "rect-channel",
        }
    }

    pub fn build(self, h: f64) -> Result<Problem, PresetError> {
        match self {
            Preset::PaperChannel => {
                let text = if (h - 0.05).abs() < 1e-12 {
                    PAPER_CHANNEL_H005
                } else if (h - 0.2).abs() < 1e-12 {
                    PAPER_CHANNEL_H02
                } else {
                    return Err(PresetError::NoFixture(h));
                };
                Ok(Problem { mesh: Arc::new(parse_msh_named(text.as_bytes())?), obstacles: ObstacleSet::MeshRegions })
            }
            Preset::RectChannel => Ok(Problem {
                mesh: Arc::new(generate_channel_mesh(CHANNEL, &[RECT_OBSTACLE], h)?),
                obstacles: ObstacleSet::MeshRegions,
            }),
        }
    }
}

/// A mesh and where its obstacles are.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Arc<Mesh>,
    pub obstacles: ObstacleSet,
}

impl Problem {
    /// Mesh file with named physical groups; obstacles come from its
    /// surface tags.
    pub fn from_msh_file(path: &Path) -> Result<Problem, PresetError> {
        let bytes =
            std::fs::read(path).map_err(|source| PresetError::Io { path: path.display().to_string(), source })?;
        Ok(Problem { mesh: Arc::new(parse_msh_named(&bytes)?), obstacles: ObstacleSet::MeshRegions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_build() {
        assert_eq!("paper-channel".parse::<Preset>().unwrap(), Preset::PaperChannel);
        assert!("paper".parse::<Preset>().is_err());
        let coarse = Preset::PaperChannel.build(0.2).unwrap();
        assert_eq!(coarse.mesh.num_obstacles(), 2);
        assert!(matches!(Preset::PaperChannel.build(0.1), Err(PresetError::NoFixture(_))));
        let rect = Preset::RectChannel.build(0.1).unwrap();
        assert_eq!(rect.mesh.num_obstacles(), 1);
    }
}
