//! Sensor selection for target tracking in wireless sensor networks whose
//! sensors observe the target only with some probability.
//!
//! The crate simulates a moving target, tracks it with a SIR particle filter,
//! and at every step chooses which sensors transmit by solving a two-objective
//! problem (information gap vs. number of active sensors) with NSGA-II. The
//! information gap is measured either with Fisher information or with an upper
//! bound on mutual information.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod infometrics;
pub mod linalg;
pub mod moo;
pub mod numeric;
pub mod rng;
pub mod selection;
pub mod sensing;
pub mod tracking;

pub use error::{Error, Result};
