//! Numerical core for the quantum Heisenberg manifold.
//!
//! Everything here is `no_std` (with `alloc`): exact star-product arithmetic
//! on finite coefficient maps, the defining representation used as an oracle,
//! block-diagonal truncations of the Dirac operator, Connes forms, connections
//! with their curvature, and the spectral-flow index pairing.
//!
//! Conventions are fixed once and used throughout; see [`conventions`].

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod connections;
pub mod conventions;
pub mod dirac;
mod error;
pub mod forms;
pub mod ktheory;
pub mod linalg;
pub mod math;
mod params;
pub mod repdef;

pub use error::Error;
pub use num_complex::Complex64;
pub use params::{BasisIndex, ModelParams, Window};

pub type Result<T, E = Error> = core::result::Result<T, E>;
