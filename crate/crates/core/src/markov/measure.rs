use std::ops::Index;

use crate::error::{Error, Result};

/// Tolerance for "sums to one".
pub const DISTRIBUTION_TOL: f64 = 1e-12;

/// Non-negative finite weights over the states `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::invalid(format!(
                "weight {w} of state {i} is not a finite non-negative number"
            )));
        }
        Ok(Self { weights })
    }

    /// Like [`Measure::new`] but also requires the weights to sum to 1.
    pub fn distribution(weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(weights)?;
        if !m.is_distribution() {
            return Err(Error::invalid(format!(
                "weights sum to {}, not 1",
                m.total()
            )));
        }
        Ok(m)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Unit mass on `state`.
    pub fn point(n: usize, state: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[state] = 1.0;
        Self { weights }
    }

    pub(crate) fn from_vec_unchecked(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_distribution(&self) -> bool {
        (self.total() - 1.0).abs() <= DISTRIBUTION_TOL
    }

    /// ℓ¹ distance.
    pub fn l1_distance(&self, other: &Measure) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Total-variation distance, half the ℓ¹ distance.
    pub fn total_variation(&self, other: &Measure) -> f64 {
        0.5 * self.l1_distance(other)
    }

    pub fn max_abs_diff(&self, other: &Measure) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for Measure {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}
