//! Bernoulli hyper-edge percolation on `Z^d`.
//!
//! A translation-invariant intensity measure `μ` assigns weights to classes
//! of finite vertex sets; each hyper-edge `h` is open with probability
//! `1 - (1 - u)^{μ({h})}`. The crate samples coupled configurations on finite
//! windows, labels their clusters, and runs the experiment suite built on top.

pub mod clusters;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod measure;
pub mod partitions;
pub mod report;
pub mod rng;
pub mod sampler;

mod anchors;

pub use error::{Error, Result};
