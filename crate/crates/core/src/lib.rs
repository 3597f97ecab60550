//! Numerical workbench for fixed-energy inverse scattering on genus-zero
//! surfaces with Euclidean ends.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: punctured spheres, divisors, rational functions.
//! * [`phase`]: holomorphic Morse phases, amplitudes, Taylor matching.
//! * [`fieldops`]: grid fields, spectral calculus, Cauchy and Green operators.
//! * [`carleman`]: numerical checks of weighted Carleman inequalities.
//! * [`cgo`]: complex geometrical optics solutions and their remainders.
//! * [`scattering`]: Lippmann–Schwinger solves and the scattering matrix.
//! * [`identify`]: stationary-phase pairings and pointwise identification.
//! * [`paleywiener`]: complex Fourier slices and sphere division.
//! * [`experiment`]: configuration and batch runners behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleman;
pub mod cgo;
pub mod error;
pub mod experiment;
pub mod fieldops;
pub mod geometry;
pub mod identify;
pub mod krylov;
pub mod paleywiener;
pub mod phase;
pub mod potentials;
pub mod scattering;
pub mod special;

pub use error::{Error, Result};
pub use fieldops::{Field, Grid};
pub use num_complex::Complex64;

/// Version string written next to every experiment output.
pub const VERSION: &str = concat!("cgoscatter ", env!("CARGO_PKG_VERSION"));
