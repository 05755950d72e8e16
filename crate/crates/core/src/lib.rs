//! Cone-supported vacuum initial data for the Einstein constraint equations.
//!
//! The seed `(h₀, π₀)` is an explicit potential construction supported in a cone;
//! the correction solves `(h₁, π₁) = S Φ(h₀ + h₁, π₀ + π₁)` by Picard iteration,
//! with `S` built from the conical kernels in [`kernels`].

pub mod checks;
pub mod config;
pub mod constraints;
pub mod convolve;
pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod jet;
pub mod kernels;
pub mod pipeline;
pub mod quadrature;
pub mod seed;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
