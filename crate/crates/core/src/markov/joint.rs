//! Transition matrix of a system of agents whose next states are drawn
//! independently given the current joint state.
//!
//! Joint states are enumerated in mixed radix with agent 0 as the most
//! significant digit, so for agents that ignore each other the joint matrix is
//! the Kronecker product `P_0 ⊗ P_1 ⊗ …`.

use super::matrix::StochasticMatrix;
use super::measure::DISTRIBUTION_TOL;
use crate::error::{Error, Result};

/// Default cap on the number of joint states.
pub const JOINT_STATE_CAP: usize = 4096;

/// `Pr(next state of one agent | current joint state)`: one row per joint state,
/// one column per scalar state of the agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConditional {
    states: usize,
    table: Vec<f64>,
}

impl AgentConditional {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let states = rows.first().map_or(0, Vec::len);
        if states == 0 {
            return Err(Error::invalid(
                "conditional needs at least one row and column",
            ));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != states {
                return Err(Error::DimensionMismatch {
                    expected: states,
                    got: r.len(),
                });
            }
            if r.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid(format!(
                    "row {i} has an entry outside [0, 1]"
                )));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > DISTRIBUTION_TOL {
                return Err(Error::invalid(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self {
            states,
            table: rows.into_iter().flatten().collect(),
        })
    }

    /// Conditional of agent `agent` that only looks at its own current state,
    /// moving according to `marginal`. `sizes` lists every agent's state count.
    pub fn independent(marginal: &StochasticMatrix, agent: usize, sizes: &[usize]) -> Result<Self> {
        if agent >= sizes.len() || sizes[agent] != marginal.n() {
            return Err(Error::invalid(format!(
                "agent {agent} does not have {} states in {sizes:?}",
                marginal.n()
            )));
        }
        let joint: usize = sizes.iter().product();
        let stride: usize = sizes[agent + 1..].iter().product();
        let rows = (0..joint)
            .map(|y| marginal.row((y / stride) % sizes[agent]).to_vec())
            .collect();
        Self::new(rows)
    }

    /// Number of scalar states of this agent.
    pub fn states(&self) -> usize {
        self.states
    }

    /// Number of joint states the table is conditioned on.
    pub fn joint_states(&self) -> usize {
        self.table.len() / self.states
    }

    #[inline]
    pub fn get(&self, joint: usize, next: usize) -> f64 {
        self.table[joint * self.states + next]
    }
}

/// Joint transition `Pr(X | Y) = Π_i Pr(ξ_i' = X_i | Y)`, capped at [`JOINT_STATE_CAP`] states.
pub fn joint_transition(conditionals: &[AgentConditional]) -> Result<StochasticMatrix> {
    joint_transition_capped(conditionals, JOINT_STATE_CAP)
}

pub fn joint_transition_capped(
    conditionals: &[AgentConditional],
    cap: usize,
) -> Result<StochasticMatrix> {
    if conditionals.is_empty() {
        return Err(Error::invalid("need at least one agent"));
    }
    let joint = conditionals
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.states()))
        .filter(|&j| j <= cap)
        .ok_or_else(|| Error::StateSpaceTooLarge {
            states: conditionals
                .iter()
                .fold(1usize, |acc, c| acc.saturating_mul(c.states())),
            cap,
        })?;
    if let Some(c) = conditionals.iter().find(|c| c.joint_states() != joint) {
        return Err(Error::DimensionMismatch {
            expected: joint,
            got: c.joint_states(),
        });
    }

    let mut entries = vec![0.0; joint * joint];
    let mut digits = vec![0usize; conditionals.len()];
    for y in 0..joint {
        let row = &mut entries[y * joint..(y + 1) * joint];
        digits.iter_mut().for_each(|d| *d = 0);
        for cell in row.iter_mut() {
            *cell = conditionals
                .iter()
                .zip(&digits)
                .map(|(c, &x)| c.get(y, x))
                .product();
            // advance the mixed-radix counter, last agent fastest
            for (d, c) in digits.iter_mut().zip(conditionals).rev() {
                *d += 1;
                if *d < c.states() {
                    break;
                }
                *d = 0;
            }
        }
    }
    Ok(StochasticMatrix::from_entries_unchecked(joint, entries))
}
