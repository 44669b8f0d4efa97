//! Supersonic flutter of cracked functionally graded Mindlin plates.
//!
//! The pipeline runs material grading and section integrals ([`material`]),
//! a structured mesh with boundary constraints ([`mesh`]), level-set crack
//! enrichment ([`crack`]), element matrices and assembly ([`fem`]), modal
//! reduction ([`eigen`]) and finally the aerodynamic pressure sweep with
//! coalescence detection ([`flutter`]). [`config`] and [`runner`] drive it
//! from a TOML file.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the thin-plate pipeline needs.

// NaN-rejecting `!(x > 0)` guards and index loops over coupled arrays are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod scalar;

pub mod config;
pub mod crack;
pub mod eigen;
pub mod fem;
pub mod flutter;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod quadrature;
pub mod runner;
pub mod shape;

pub use error::{FlutterError, Result};
pub use scalar::Real;

pub type Plate = material::FgmPlate<f64>;
pub type Phase = material::MaterialPhase<f64>;
pub type Section = material::SectionProperties<f64>;
pub type PlateMesh = mesh::Mesh<f64>;
pub type Crack = crack::CrackGeometry<f64>;
pub type CrackOnMesh = crack::CrackModel<f64>;
pub type System = fem::GlobalSystem<f64>;
pub type Modes = eigen::ModalBasis<f64>;
pub type Pencil = eigen::ReducedPencil<f64>;
pub type Sweep = flutter::SweepConfig<f64>;
pub type Point = flutter::FlutterPoint<f64>;
