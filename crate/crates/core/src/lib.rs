//! Delta-sequence regularization of singular kernels and data, with solvers for
//! weakly singular Volterra equations, parabolic and Schrödinger evolutions, and
//! the growth-law analysis used to classify ε-families as moderate or negligible.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod fracint;
pub mod grid;
pub mod kernels;
pub mod mollifier;
pub mod regularize;
pub mod special;
pub mod spectral;
pub mod volterra;

pub use error::{Error, Result};
