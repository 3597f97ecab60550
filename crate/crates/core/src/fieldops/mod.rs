//! Grid calculus on a square window of the plane chart.
//!
//! A [`Field`] stores complex samples on the window `[-R, R]²` with `n`
//! points per axis. Sample `(i, k)` sits at `z = (-R + iΔ) + i(-R + kΔ)`,
//! `Δ = 2R/(n-1)`, and is stored at index `i*n + k`.
//!
//! Derivatives are spectral; convolutions with the Cauchy, logarithmic and
//! Helmholtz kernels use truncated kernels whose Fourier transforms are known
//! in closed form, so aperiodic convolution on the window is exact up to the
//! spectral accuracy of the data.

mod fft;
mod grid;
pub mod io;
mod kernels;
mod spectral;
mod weights;

pub(crate) use fft::{fft2, Direction};

pub use grid::{Field, Grid};
pub use kernels::{
    cauchy_transform, conj_cauchy_transform, green_laplace, helmholtz_resolvent,
    tail_fraction, Radiation, DEFAULT_TAIL_THRESHOLD,
};
pub use spectral::{
    ddz, ddzbar, gradient, positive_laplacian, spectral_frequencies, taper, taper_1d,
    TAPER_FLAT_FRACTION,
};
pub use weights::{
    convexified_weight, phi0, phi0_radial, phi0_radial_derivative, weighted_norm, x_function,
    NormOrder, WeightSpec,
};
