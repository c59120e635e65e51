//! Hypergraph-counting detection and recovery for the order-p spiked tensor
//! model: exact counting statistics at small scale, color-coding dynamic
//! programs at larger scale, and a reproducible Monte Carlo harness.

pub mod combinatorics;
pub mod counting;
pub mod error;
pub mod family;
pub mod harness;
pub mod hypergraph;
pub mod inference;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
