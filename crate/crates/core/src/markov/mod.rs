//! Finite discrete-time Markov chains.
//!
//! Measures are row vectors and act on the left: one step maps `λ` to `λP`
//! with `(λP)_j = Σ_i λ_i p_ij`, so that `Pr(X^t = j) = (λP^t)_j`.

mod classify;
pub mod io;
mod joint;
mod matrix;
mod measure;

pub use classify::{classify, ChainClassification};
pub use joint::{joint_transition, joint_transition_capped, AgentConditional, JOINT_STATE_CAP};
pub use matrix::{
    equilibrium_limit, invariant_cross_check, invariant_distribution,
    invariant_distribution_capped, n_step, path_probability, propagate, solve_invariant,
    InvariantCrossCheck, StochasticMatrix, DIRECT_SOLVE_MAX, POWER_ITERATION_CAP, PRODUCT_TOL,
};
pub use measure::{Measure, DISTRIBUTION_TOL};
