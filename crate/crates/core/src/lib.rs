//! Fictitious-domain flow solver with Brinkman volume penalization.
//!
//! Steady Stokes and Navier-Stokes problems in a 2D channel are discretized
//! with Taylor-Hood (P2/P1) elements on conforming triangle meshes. Obstacles
//! are either removed from the mesh (the reference problem on the fluid
//! region) or kept and penalized with an `R * u` term that drives the velocity
//! to zero inside them as `R` grows. The [`analysis`] module measures how fast
//! the penalized velocity approaches the reference one.
//!
//! Module map:
//!
//! * [`mesh`]: triangle meshes, Gmsh MSH 2.2 I/O, the structured channel
//!   mesher and fluid-submesh extraction.
//! * [`spaces`]: Taylor-Hood degree-of-freedom numbering and Dirichlet data.
//! * [`penalty`]: obstacle geometry and the per-triangle penalty field.
//! * [`assembly`]: quadrature, sparse matrices, Stokes/convection assembly and
//!   Dirichlet elimination.
//! * [`solver`]: sparse LU, Stokes solves and Newton iteration with penalty
//!   continuation.
//! * [`analysis`]: error norms, fluxes, rates and the penalty sweep.
//! * [`io`]: VTK and table writers, run configuration.

pub mod analysis;
pub mod assembly;
pub mod io;
pub mod mesh;
pub mod par;
pub mod penalty;
pub mod solver;
pub mod spaces;

pub use mesh::{BoundaryTag, Mesh, Point2, RegionTag};
pub use par::Execution;
