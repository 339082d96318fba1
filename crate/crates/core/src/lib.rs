//! Finite-element solver for the steady scalar convection-diffusion equation
//!
//! ```text
//! -eps * div(a grad u) + b . grad u + c u = S
//! ```
//!
//! on the unit interval and the unit square, with Galerkin, SUPG and
//! artificial-diffusion discretizations, closed-form reference solutions, and
//! error/oscillation metrics.

pub mod analytic;
pub mod assembly;
pub mod elements;
pub mod error;
pub mod linsolve;
pub mod mesh;
pub mod metrics;
pub mod solver;
pub mod stabilization;

pub use error::{Error, Result};

/// Coordinates `[x, y]`; one-dimensional problems keep `y = 0`.
pub type Point = [f64; 2];
