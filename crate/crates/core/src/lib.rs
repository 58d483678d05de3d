//! Beamforming for null-space based SWIPT downlinks.
//!
//! A multi-antenna access point serves information users (IUs) and energy
//! users (EUs) at once. This crate generates Rician channel scenarios, builds
//! and solves the semidefinite relaxations of the full problem and of its
//! null-space restriction, runs the low-complexity MRT-plus-one-boosted-beam
//! design, and evaluates the resulting beams.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod sdp;

pub use error::{Error, Result};
