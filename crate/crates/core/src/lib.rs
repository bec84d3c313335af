//! Pseudo-spectral Galerkin simulator for the 3D fractionally dissipated
//! stochastic primitive equations, with a numerical estimate lab.

pub mod error;
pub mod integrator;
pub mod io;
pub mod lab;
pub mod noise;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
