//! Numerical core for Bayesian optimal experimental design of two-component
//! column chromatography.
//!
//! The crate provides, in dependency order:
//!
//! - [`model`]: parameter and design domain types, the competitive Langmuir
//!   isotherm and its Jacobian, and the Gaussian log-likelihood shared by the
//!   estimation and design machinery.
//! - [`solver`]: a flux-limited finite-volume forward solver for the
//!   rescaled equilibrium dispersive model, integrated in time with classical
//!   RK4, producing outlet breakthrough curves and point observations.
//! - [`sparse`]: nested piecewise-linear sparse-grid (Smolyak) interpolation
//!   on `[-1, 1]^r` with hierarchical surpluses and vector-valued outputs.
//! - [`surrogate`]: a fast replacement of the forward map: one sparse-grid
//!   interpolant of the outlet curves per design-grid node, blended bilinearly
//!   across the design rectangle.
//! - [`oed`]: expected-information-gain estimation by accelerated
//!   double-loop Monte Carlo, design-grid sweeps and argmax selection.
//! - [`mcmc`]: delayed-rejection adaptive Metropolis (DRAM) sampling of the
//!   parameter posterior against either forward backend.
//!
//! The crate is `no_std` + `alloc`; everything that touches the file system,
//! clocks or thread pools lives in the companion CLI crate. All randomized
//! routines take explicit seeds and are bit-for-bit reproducible.

#![no_std]
#![forbid(unsafe_code)]
// Indexed loops over small fixed-dimension matrices and NaN-rejecting guards
// of the form `!(x > 0.0)` are used deliberately throughout the numerics.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod fmath;
pub mod mcmc;
pub mod model;
pub mod oed;
pub mod random;
pub mod solver;
pub mod sparse;
pub mod surrogate;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
