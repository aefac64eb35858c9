//! Exact enumeration, Monte-Carlo sampling and limit shapes for lozenge
//! tilings of cut hexagons whose cut edge is a free boundary.
//!
//! The crate is organised bottom-up:
//! - [`exact`]: rational arithmetic and q-combinatorics
//! - [`enumeration`]: partition functions of endpoint configurations
//! - [`sampler`]: Metropolis and exact samplers of endpoint configurations
//! - [`density`]: closed-form limit densities
//! - [`resolvent`]: numerical solver for multi-band equilibrium problems
//! - [`arctic`]: arctic curves and slope fields
//! - [`verify`]: the cross-validation report used by the CLI

pub mod arctic;
pub mod density;
pub mod enumeration;
mod error;
pub mod exact;
pub mod quad;
pub mod resolvent;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
