//! Writers, run configuration and built-in problem presets.

pub mod config;
pub mod presets;
pub mod table;
pub mod vtk;

pub use config::{ConfigError, MeshManifest, RunConfig};
pub use presets::{Preset, PresetError, Problem};
pub use table::{format_csv, format_markdown, format_number, write_table, TableFormat};
pub use vtk::{format_vtk, read_vtk_summary, write_vtk, VtkError, VtkField, VtkSummary};
