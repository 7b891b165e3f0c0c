//! Finite hyperbolic lattices on closed surfaces and the surface codes they carry.

pub mod cli;
pub mod css;
pub mod cycles;
pub mod decoder;
pub mod error;
pub mod fuchsian;
pub mod geometry;
pub mod gf2;
pub mod lattice;
pub mod montecarlo;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
