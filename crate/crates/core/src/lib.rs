//! Samplers, explicit densities and numerical checks for random closed sets:
//! marked Poisson systems, the Brownian zero-set seed, its anchor-adapted
//! tilt, and the Hellinger/total-variation estimates built on them.

// NaN-rejecting guards are written as `!(x > 0.0)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod cli;
pub mod closedset;
pub mod distance;
pub mod error;
pub mod poisson;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod tilt;
pub mod verify;

pub use error::{Error, Result};
