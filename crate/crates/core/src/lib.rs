//! Simulation and latency optimization for fluid-antenna-enabled integrated
//! sensing, communication, and computing (ISCC) vehicular networks.
//!
//! A base station with `M` movable receive antennas serves `N` vehicles. Each
//! vehicle offloads a communication dataset and a sensing dataset to an edge
//! server co-located with the base station. The total system latency is
//! minimized per time slot by alternating over three blocks:
//!
//! 1. [`cpu_alloc`]: split of the edge CPU budget across the `2N` tasks,
//! 2. [`combining`]: receive combiners for the communication and sensing links,
//! 3. [`placement`]: antenna positions, searched with particle swarm optimization.
//!
//! [`orchestrator`] drives the alternating loop and the comparison schemes,
//! and [`cli`] is the experiment harness behind the `fa-iscc` binary.

// `!(x > 0.0)` checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod combining;
pub mod cpu_alloc;
mod error;
pub mod latency;
pub mod orchestrator;
pub mod placement;
pub mod scenario;
pub mod seed;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
