use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::seed::run_rng;
use crate::error::Result;
use crate::evolution::{
    generation_step_by_deviation, init_population, FitnessSummary, Population, Request,
};
use crate::macrostate::{MacroStateDistribution, MacroStateLabel};

/// Statistics of one generation of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    /// Raw (not parsimony-adjusted) fitness; 0 once extinct.
    pub max_fitness: f64,
    pub mean_fitness: f64,
    pub population_size: usize,
    pub label: MacroStateLabel,
}

/// Everything recorded during one run: generations `0..=horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrajectory {
    pub run_index: u64,
    pub records: Vec<GenerationRecord>,
    /// Populations at the configured checkpoint generations, in order.
    pub checkpoints: Vec<Population>,
}

impl RunTrajectory {
    pub fn labels(&self) -> impl Iterator<Item = MacroStateLabel> + '_ {
        self.records.iter().map(|r| r.label)
    }

    pub fn final_record(&self) -> &GenerationRecord {
        self.records.last().expect("trajectory has generation 0")
    }
}

fn record(population: &Population, deviations: &[u32]) -> GenerationRecord {
    match FitnessSummary::from_deviations(deviations) {
        Some(s) => GenerationRecord {
            generation: population.generation(),
            max_fitness: s.max_fitness,
            mean_fitness: s.mean_fitness,
            population_size: population.len(),
            label: MacroStateLabel::Deviation(s.best_deviation),
        },
        None => extinct_record(population.generation()),
    }
}

fn extinct_record(generation: u64) -> GenerationRecord {
    GenerationRecord {
        generation,
        max_fitness: 0.0,
        mean_fitness: 0.0,
        population_size: 0,
        label: MacroStateLabel::Extinct,
    }
}

/// Executes run `run_index` of the experiment. Deterministic in
/// `(config, run_index)`; an extinct run stays extinct to the horizon.
pub fn run_single(config: &ExperimentConfig, run_index: u64) -> Result<RunTrajectory> {
    run_with(config, &config.resolve_request()?, run_index, true)
}

fn run_with(
    config: &ExperimentConfig,
    request: &Request,
    run_index: u64,
    keep_checkpoints: bool,
) -> Result<RunTrajectory> {
    config.validate()?;
    let params = &config.params;
    let mut rng = run_rng(config.master_seed, run_index);
    let mut population = init_population(params, &mut rng);
    let initial_mean = population.mean_size();

    let mut records = Vec::with_capacity(config.generations as usize + 1);
    let mut checkpoints = Vec::new();
    let wants = |g: u64| keep_checkpoints && config.checkpoints.contains(&g);

    let mut deviations = population.deviations(request);
    records.push(record(&population, &deviations));
    if wants(0) {
        checkpoints.push(population.clone());
    }
    for g in 1..=config.generations {
        if population.is_empty() {
            records.push(extinct_record(g));
            if wants(g) {
                checkpoints.push(Population::new(Vec::new(), g));
            }
            continue;
        }
        population =
            generation_step_by_deviation(&population, &deviations, params, initial_mean, &mut rng)?;
        deviations = population.deviations(request);
        records.push(record(&population, &deviations));
        if wants(g) {
            checkpoints.push(population.clone());
        }
    }
    Ok(RunTrajectory {
        run_index,
        records,
        checkpoints,
    })
}

/// Per-run macro-state label sequences of an ensemble, indexed `[run][generation]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleLabels {
    pub runs: Vec<Vec<MacroStateLabel>>,
}

impl EnsembleLabels {
    pub fn horizon(&self) -> u64 {
        self.runs[0].len() as u64 - 1
    }

    /// Occupation estimate at `generation` across runs.
    pub fn occupation(&self, generation: u64) -> MacroStateDistribution {
        let g = generation as usize;
        MacroStateDistribution::from_labels(generation, self.runs.iter().map(|r| r[g]))
            .expect("ensemble has at least one run")
    }

    /// Occupation estimates for every generation `0..=horizon`.
    pub fn occupations(&self) -> Vec<MacroStateDistribution> {
        (0..=self.horizon()).map(|g| self.occupation(g)).collect()
    }
}

/// Runs `config.runs` independent trajectories, in parallel, and keeps their labels.
///
/// Results are ordered by run index, so they do not depend on scheduling.
pub fn run_ensemble_labels(config: &ExperimentConfig) -> Result<EnsembleLabels> {
    let request = config.resolve_request()?;
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| run_with(config, &request, i, false).map(|t| t.labels().collect()))
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(EnsembleLabels { runs })
}

/// Occupation probabilities of the macro-states at every generation.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<Vec<MacroStateDistribution>> {
    Ok(run_ensemble_labels(config)?.occupations())
}
