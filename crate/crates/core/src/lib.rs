//! Numerical geometry at infinity for hyperbolic 3-space.
//!
//! Everything here works on rectangular grid charts over planar domains:
//! finite-difference tensor calculus, Schwarzian derivatives and tensors,
//! the hyperboloid and light-cone models, Epstein surfaces of conformal
//! metrics with their data at infinity, the dual surfaces in the space of
//! horospheres, a Newton solver for the Monge-Ampère equation of linear
//! Weingarten surfaces, and extremal-length computations on flat tori.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]

extern crate alloc;

pub mod calculus;
mod error;
pub mod epstein;
pub mod foliation;
pub mod horocone;
pub mod linalg;
pub mod minkowski;
pub mod schwarzian;
pub mod weingarten;

pub use error::{Error, Result};
pub use num_complex::Complex64;
