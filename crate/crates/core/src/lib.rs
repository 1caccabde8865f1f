//! Connectivity kernels induced by banks of receptive-profile filters.
//!
//! A bank `{ψ_p}` indexed by a feature grid induces the kernel
//! `K(p, q) = Re⟨ψ_p, ψ_q⟩`, the distance `d = sqrt(2(η − K))`, and, after
//! rectification and a two-stage normalisation, a column-stochastic operator
//! whose iterates spread activity along association fields.

pub mod cli;
pub mod error;
pub mod filterbank;
pub mod geometry;
pub mod kernel;
pub mod propagation;
pub mod viz_export;

pub use error::{Error, Result};
