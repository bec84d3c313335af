//! Spectral core: lattice, fields, transforms and norms.

pub mod field;
pub mod lattice;
pub mod norms;
pub mod transform;

pub use field::{Parity, SpectralField};
pub use lattice::Lattice;
