//! Accessibility percolation on hypercubes and NK fitness landscapes.
//!
//! The crate is split along the lines of the problem:
//!
//! - [`analytic`]: closed-form threshold constants, generating-function
//!   coefficients, odd-occurrence probabilities and spacing moments.
//! - [`hypercube`]: conditioned fitness fields on `{0,1}^N`, accessibility
//!   decisions and exact path counting.
//! - [`sequence`]: update-sequence measures, the continuous placement model
//!   and the good-path predicates.
//! - [`nk`]: NK landscapes, exhaustive and blockwise-greedy maximization,
//!   branching random walk maxima and adaptive walks.
//! - [`harness`]: Monte Carlo sweeps, oracle validation and result
//!   serialization.
//!
//! Randomness comes from the counter-based generator in [`rng`], so every
//! sampled object is a pure function of its seed.

pub mod analytic;
pub mod error;
pub mod harness;
pub mod hypercube;
pub mod nk;
pub mod rng;
pub mod sequence;
pub mod stats;

pub use error::{Error, Result};
