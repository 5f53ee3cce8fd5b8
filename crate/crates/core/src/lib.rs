//! A laboratory for discrete p-harmonic maps with small range.
//!
//! Maps from a flat triangulated domain into an embedded surface are
//! computed by projected descent on the p-energy under Dirichlet data and
//! an optional geodesic-ball range constraint. The [`oracles`] module
//! checks the vector, second-fundamental-form and stability inequalities
//! that underpin uniqueness of such maps.

pub mod boundary;
pub mod cli;
pub mod energy;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod oracles;
pub mod solver;
pub mod summation;

pub use energy::{EnergyReport, ManifoldMap};
pub use geometry::{AmbientVector, GeodesicBall, ManifoldKind, TargetManifold};
pub use mesh::DomainMesh;
