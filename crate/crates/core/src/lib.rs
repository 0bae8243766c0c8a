//! Dynamics of point masses in four-dimensional Euclidean space under the
//! double planar rotation symmetry `SO(2) x SO(2)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`geom4`]: rotation normal forms, hat map, double-polar coordinates and
//!   the torus momentum map.
//! - [`potentials`]: pair potentials with analytic derivatives.
//! - [`central_force`]: the one-body problem and its reduction.
//! - [`nbody`]: the n-body Hamiltonian and a leapfrog propagator.
//! - [`rel_equilibria`]: relative equilibria, balanced and central configurations.
//! - [`ngons`]: regular polygons in R^4 and their relative equilibria.
//! - [`threebody`]: the three-body problem reduced to six degrees of freedom.
//! - [`stability`]: linear analysis of the equilateral relative equilibrium.
//! - [`scenario`] and [`output`]: configuration files and deterministic output.

pub mod central_force;
pub mod error;
pub mod geom4;
pub mod integrator;
pub mod nbody;
pub mod ngons;
pub mod output;
pub mod potentials;
pub mod rel_equilibria;
pub mod roots;
pub mod scenario;
pub mod stability;
pub mod threebody;

pub use error::{Error, ErrorKind, Result};
pub use geom4::{GroupVelocity, Mat4, Momentum, Vec4};
pub use potentials::{PairPotential, Potential};
