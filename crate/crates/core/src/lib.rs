//! Axisymmetric minimization of the limiting Landau-de Gennes energy over
//! S²-valued fields on the unit ball, with Signorini obstacle constraints on
//! the equatorial disk, plus the defect-structure diagnostics (biaxial ring,
//! split-core segment, tangent-map profiles) used to analyze the minimizers.
//!
//! The computational domain is the quarter disk `{(ρ, z) : ρ, z ≥ 0, ρ²+z² ≤ 1}`;
//! the full-ball energy is recovered from the mirror symmetry in `z` and the
//! analytic azimuthal integral.

pub mod analysis;
pub mod checkpoint;
pub mod energy;
pub mod fields;
pub mod mesh;
pub mod optimizer;
pub mod tangent;
pub mod verify;

pub use energy::EnergyReport;
pub use fields::Field3;
pub use mesh::{Mesh, NodeClass};
pub use optimizer::{Branch, ObstacleSpec, SolverConfig};
