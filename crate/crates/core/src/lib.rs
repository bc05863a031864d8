//! Physical purification maps for finite sets of mixed quantum states.
//!
//! The crate decides whether a set of density matrices admits a
//! completely-positive trace-preserving map sending every member to one of
//! its purifications, computes the faithfulness bounds for two-state
//! purifiers with pure output, and builds the channels that saturate them.

pub mod channels;
pub mod error;
pub mod json;
pub mod linalg;
pub mod metrics;
pub mod purification;
pub mod states;
pub mod suites;
pub mod sweep;

pub use error::{Error, Result};
