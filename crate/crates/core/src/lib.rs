//! Stochastic Hopfield networks, the diagonal 3D Ising model they map to, and
//! the cube vertex operators satisfying the twisted tetrahedron equation.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar for the common cases.

pub mod equivalence;
pub mod hopfield;
pub mod hypercube;
pub mod ising;
pub mod scalar;
pub mod sparse;
pub mod spin;
pub mod tte;
pub mod vertex;

pub use hypercube::{code, EdgeChoiceTables, SubfaceCode};
pub use ising::CubicLattice;
pub use scalar::Scalar;
pub use spin::{NetworkState, SpinConfig};

pub type HopfieldNet = hopfield::HopfieldNet<f64>;
pub type HopfieldNet32 = hopfield::HopfieldNet<f32>;
pub type TriangularNet = hopfield::TriangularNet<f64>;
pub type TriangularNet32 = hopfield::TriangularNet<f32>;
pub type SparseOperator = sparse::SparseOperator<f64>;
pub type SparseOperator32 = sparse::SparseOperator<f32>;
