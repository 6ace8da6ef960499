//! Staggered finite-difference / finite-volume schemes on primary/dual meshes.
//!
//! Two discretizations share one toolbox:
//!
//! * a cell-centered scheme for `-u'' = f` on nonuniform partitions of `[0, 1]`
//!   with homogeneous Dirichlet data ([`mesh1d`], [`elliptic1d`]);
//! * the MAC scheme for the two-dimensional incompressible Stokes problem in
//!   vorticity form on unstructured orthogonal primary/dual meshes
//!   ([`mesh2d`], [`ops2d`], [`stokes2d`]).
//!
//! [`harness`] runs manufactured-solution convergence studies for both, and
//! [`cli`] exposes everything through the `stagfv` binary.

pub mod cli;
pub mod elliptic1d;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mesh1d;
pub mod mesh2d;
pub mod ops2d;
pub mod quadrature;
pub mod stokes2d;

pub use error::{Error, Result};
