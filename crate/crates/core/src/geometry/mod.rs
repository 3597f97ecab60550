//! Genus-zero surfaces with Euclidean ends and divisor arithmetic.

mod divisor;
mod poly;
mod rational;
mod surface;

pub use divisor::{Divisor, Point};
pub use poly::{cluster_roots, Poly};
pub use rational::{
    basis_of_divisor, basis_of_space, principal_divisor, riemann_roch_dim, RationalFunction,
    ROOT_CLUSTER_TOL,
};
pub use surface::SurfaceModel;
pub(crate) use surface::smooth_step;
