//! Degree of instability across a grid of mutation and crossover rates.
//!
//! The limit distribution of a run is estimated by its macro-state occupancy
//! over the trailing `window` generations ending at the horizon. Each run
//! yields a degree of instability; a cell reports the mean over its runs. The
//! entropy base `N` is the number of distinct labels seen in any run's window
//! within the cell (at least 2). The cross-run distribution at the horizon is
//! also reduced to a degree of instability and reported as `ensemble_delta`.

use super::config::ExperimentConfig;
use super::run::{run_ensemble_labels, EnsembleLabels};
use crate::error::{Error, Result};
use crate::evolution::check_rate;
use crate::macrostate::{
    degree_of_instability, entropy_base, MacroStateDistribution, MacroStateLabel,
};

/// Instability summary of one ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct Instability {
    /// Mean over runs of the per-run degree of instability.
    pub delta: f64,
    /// Entropy base used for the per-run values.
    pub n: usize,
    /// Degree of instability of the cross-run distribution at the horizon.
    pub ensemble_delta: f64,
    pub ensemble_n: usize,
    /// Occupation probability of the maximum macro-state at the horizon.
    pub p_max: f64,
}

/// Occupancy of one run's trailing window, as a distribution stamped with the horizon.
pub fn window_occupancy(labels: &[MacroStateLabel], window: usize) -> MacroStateDistribution {
    let start = labels.len().saturating_sub(window);
    let horizon = labels.len() as u64 - 1;
    MacroStateDistribution::from_labels(horizon, labels[start..].iter().copied())
        .expect("run has at least one generation")
}

pub fn instability(labels: &EnsembleLabels, window: usize) -> Result<Instability> {
    let per_run: Vec<_> = labels
        .runs
        .iter()
        .map(|r| window_occupancy(r, window))
        .collect();
    let n = entropy_base(&per_run);
    let delta = per_run
        .iter()
        .map(|d| degree_of_instability(d, n))
        .sum::<Result<f64>>()?
        / per_run.len() as f64;

    let last = labels.occupation(labels.horizon());
    let ensemble_n = entropy_base([&last]);
    Ok(Instability {
        delta,
        n,
        ensemble_delta: degree_of_instability(&last, ensemble_n)?,
        ensemble_n,
        p_max: last.p(MacroStateLabel::MAX),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub runs: usize,
    pub instability: Instability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub mutation_grid: Vec<f64>,
    pub crossover_grid: Vec<f64>,
    /// Cells in mutation-major order.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, mutation_rate: f64, crossover_rate: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| {
            (c.mutation_rate - mutation_rate).abs() < 1e-9
                && (c.crossover_rate - crossover_rate).abs() < 1e-9
        })
    }
}

pub fn sweep(
    config: &ExperimentConfig,
    mutation_grid: &[f64],
    crossover_grid: &[f64],
) -> Result<SweepResult> {
    sweep_with_progress(config, mutation_grid, crossover_grid, |_| {})
}

/// Like [`sweep`], calling `on_cell` as each cell completes.
pub fn sweep_with_progress<F>(
    config: &ExperimentConfig,
    mutation_grid: &[f64],
    crossover_grid: &[f64],
    mut on_cell: F,
) -> Result<SweepResult>
where
    F: FnMut(&SweepCell),
{
    if mutation_grid.is_empty() || crossover_grid.is_empty() {
        return Err(Error::invalid("sweep grids must be non-empty"));
    }
    for &m in mutation_grid {
        check_rate("mutation_rate", m)?;
    }
    for &c in crossover_grid {
        check_rate("crossover_rate", c)?;
    }
    config.validate()?;

    let mut cells = Vec::with_capacity(mutation_grid.len() * crossover_grid.len());
    for &m in mutation_grid {
        for &c in crossover_grid {
            let mut cell_config = config.clone();
            cell_config.params.mutation_rate = m;
            cell_config.params.crossover_rate = c;
            let labels = run_ensemble_labels(&cell_config)?;
            let cell = SweepCell {
                mutation_rate: m,
                crossover_rate: c,
                runs: labels.runs.len(),
                instability: instability(&labels, config.window)?,
            };
            on_cell(&cell);
            cells.push(cell);
        }
    }
    Ok(SweepResult {
        mutation_grid: mutation_grid.to_vec(),
        crossover_grid: crossover_grid.to_vec(),
        cells,
    })
}

/// Parses `start:stop:step` (endpoints inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("bad grid {spec:?}; use start:stop:step or a,b,c"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            // snap to the decimal grid so 0.1 steps print as 0.3, not 0.30000000000000004
            (0..=count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}
