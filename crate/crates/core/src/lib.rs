//! Simulation and analysis of evolving agent populations viewed as Markov processes.
//!
//! - [`markov`]: finite chain kernel (propagation, powers, invariant
//!   distributions, classification, joint transitions of independent agents).
//! - [`evolution`]: agents, fitness, and the genetic operators.
//! - [`macrostate`]: macro-state labels, occupation estimates, stability
//!   verdicts and the degree of instability.
//! - [`harness`]: seeded runs, ensembles, sweeps and their file outputs.

pub mod error;
pub mod evolution;
pub mod harness;
pub mod macrostate;
pub mod markov;

pub use error::{Error, Result};
