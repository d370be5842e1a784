use serde::{Deserialize, Serialize};

use super::agent::{ATTR_MAX, ATTR_MIN};
use crate::error::{Error, Result};

/// Rates, sizes and bounds of the evolutionary process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionParams {
    /// Fraction of the surviving population receiving one point mutation.
    pub mutation_rate: f64,
    /// Fraction of the surviving population taking part in crossover.
    pub crossover_rate: f64,
    pub base_population: usize,
    pub init_attr_min: usize,
    pub init_attr_max: usize,
    pub attr_lo: u8,
    pub attr_hi: u8,
    pub parsimony_strength: f64,
    pub size_bounds: (usize, usize),
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            mutation_rate: 0.1,
            crossover_rate: 0.1,
            base_population: 300,
            init_attr_min: 3,
            init_attr_max: 6,
            attr_lo: ATTR_MIN,
            attr_hi: ATTR_MAX,
            parsimony_strength: 1.0,
            size_bounds: (30, 3000),
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn check_rate(key: &str, rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(bad(key, format!("{rate} is not a rate in [0, 1]")))
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        check_rate("mutation_rate", self.mutation_rate)?;
        check_rate("crossover_rate", self.crossover_rate)?;
        if self.base_population == 0 {
            return Err(bad("base_population", "must be positive"));
        }
        if self.init_attr_min == 0 || self.init_attr_min > self.init_attr_max {
            return Err(bad(
                "init_attr_min",
                format!(
                    "need 1 <= init_attr_min <= init_attr_max, got {} and {}",
                    self.init_attr_min, self.init_attr_max
                ),
            ));
        }
        if self.attr_lo < ATTR_MIN || self.attr_hi > ATTR_MAX || self.attr_lo > self.attr_hi {
            return Err(bad(
                "attr_lo",
                format!(
                    "attribute range [{}, {}] must lie within [{ATTR_MIN}, {ATTR_MAX}]",
                    self.attr_lo, self.attr_hi
                ),
            ));
        }
        if !(self.parsimony_strength.is_finite() && self.parsimony_strength >= 0.0) {
            return Err(bad("parsimony_strength", "must be finite and non-negative"));
        }
        let (lo, hi) = self.size_bounds;
        if lo == 0 || lo > self.base_population || self.base_population > hi {
            return Err(bad(
                "size_bounds",
                format!(
                    "need 1 <= min <= base_population ({}) <= max, got ({lo}, {hi})",
                    self.base_population
                ),
            ));
        }
        Ok(())
    }
}
