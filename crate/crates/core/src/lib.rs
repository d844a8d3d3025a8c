//! Critical geometric graph (CGG) construction over dense 2-D deployments.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! * [`geometry`]: deployments over a rectangular region;
//! * [`graphs`]: geometric graphs, critical and degree-1 radii, hop distances;
//! * [`channel`]: a slotted-Aloha Hello protocol under the SINR model, producing
//!   directed link weights;
//! * [`protocol`]: the round-synchronous min-max engine running the
//!   distance-based algorithm and DISCRIT over link weights;
//! * [`discretize`], [`selforg`] and [`localize`]: hop-distance applications.
//!
//! All randomness is driven by explicit 64-bit seeds.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod channel;
pub mod discretize;
pub mod geometry;
pub mod graphs;
pub mod localize;
pub mod protocol;
pub mod rng;
pub mod selforg;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{Deployment, DeploymentKind, Point, Region};
pub use graphs::EdgeGraph;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
