//! Plate element matrices and global assembly.

pub mod assembly;
pub mod element;

pub use assembly::{assemble, assemble_aero_damping, element_contributions, GlobalSystem, ScaleMetadata};
pub use element::{element_aero, element_mass, element_matrices, element_stiffness, BasisKind, ElementBasis, ElementMatrices, ElementMatrix};
