//! Sparse and dense linear algebra used by the eigen and flutter solvers.

pub mod dense;
pub mod skyline;
pub mod sparse;
pub mod unsymmetric;

pub use dense::Mat;
pub use skyline::{pattern_adjacency, reverse_cuthill_mckee, SkylineLdl};
pub use sparse::CsrMatrix;
