//! Numerical laboratory for distance statistics of well-distributed point
//! sets: thickened measures and their Fourier transforms, spherical and
//! convex-boundary L^2 averages, cap decompositions, lattice-point counts,
//! and the Hankel/Mattila integral apparatus.

pub mod averages;
pub mod config;
pub mod distances;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mattila;
pub mod measure;
pub mod numeric;
pub mod points;
pub mod runner;

pub use error::{Result, WelldistError};
