//! Time-parallel simulation of stochastic chemical kinetics.
//!
//! A deterministic reaction-rate coarse propagator preconditions an exact
//! next-reaction fine propagator inside the parareal iteration. All numerics
//! are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! scalar to `f64`, which the CLI and the validation suites use.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coarse;
pub mod error;
pub mod fine;
pub mod io;
pub mod network;
pub mod noise;
pub mod parareal;
pub mod scalar;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Network = network::ReactionNetwork<f64>;
pub type Path = fine::Trajectory<f64>;
