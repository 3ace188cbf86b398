//! Robust queue-length filtering for freeway on-ramps with partial
//! connected-vehicle observations.
//!
//! The crate synthesizes a filter gain from a linear matrix inequality,
//! certifies it, and validates it on a synthetic ramp-queue plant against
//! two baseline estimators under ALINEA metering.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod lmi;
pub mod matops;
pub mod metering;
pub mod plant;
pub mod sdp;

pub use error::{Error, Result};
