//! Numerical lab for a-contraction with shifts of extremal shocks in 1-D balance laws.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod contraction;
pub mod experiment;
pub mod error;
pub mod fv;
pub mod state;
pub mod relative;
pub mod shift;
pub mod shock;
pub mod system;

pub use error::{Error, Result};
pub use state::{Mat, State, MAX_DIM};
pub use system::{Burgers, FullEuler, IsentropicEuler, Region, System, SystemConfig};
