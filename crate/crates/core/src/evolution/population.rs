use rand::Rng;

use super::agent::{deviation, fitness_of_deviation, Agent, Request};
use super::params::EvolutionParams;

/// The agents alive at one generation. Agents that die are simply absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population {
    agents: Vec<Agent>,
    generation: u64,
}

impl Population {
    pub fn new(agents: Vec<Agent>, generation: u64) -> Self {
        Self { agents, generation }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn into_agents(self) -> Vec<Agent> {
        self.agents
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Mean number of attributes per agent; 0 for an empty population.
    pub fn mean_size(&self) -> f64 {
        if self.agents.is_empty() {
            return 0.0;
        }
        let total: usize = self.agents.iter().map(Agent::len).sum();
        total as f64 / self.agents.len() as f64
    }

    pub(crate) fn agents_vec_mut(&mut self) -> &mut Vec<Agent> {
        &mut self.agents
    }

    pub(crate) fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    /// Deviation of every agent from the request, in population order.
    pub fn deviations(&self, request: &Request) -> Vec<u32> {
        self.agents.iter().map(|a| deviation(a, request)).collect()
    }

    /// Max and mean raw fitness plus the best deviation.
    pub fn fitness_summary(&self, request: &Request) -> Option<FitnessSummary> {
        FitnessSummary::from_deviations(&self.deviations(request))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitnessSummary {
    pub max_fitness: f64,
    pub mean_fitness: f64,
    pub best_deviation: u32,
}

impl FitnessSummary {
    /// Summary of a population given its agents' deviations; `None` when empty.
    pub fn from_deviations(deviations: &[u32]) -> Option<Self> {
        let best = *deviations.iter().min()?;
        let sum: f64 = deviations.iter().map(|&d| fitness_of_deviation(d)).sum();
        let max_fitness = fitness_of_deviation(best);
        Some(Self {
            max_fitness,
            // summation error can push the mean of near-identical values past the max
            mean_fitness: (sum / deviations.len() as f64).min(max_fitness),
            best_deviation: best,
        })
    }
}

/// Fresh random population at generation 0.
pub fn init_population<R: Rng + ?Sized>(params: &EvolutionParams, rng: &mut R) -> Population {
    let agents = (0..params.base_population)
        .map(|_| {
            let len = rng.gen_range(params.init_attr_min..=params.init_attr_max);
            let attrs = (0..len)
                .map(|_| rng.gen_range(params.attr_lo..=params.attr_hi))
                .collect();
            Agent::from_vec_unchecked(attrs)
        })
        .collect();
    Population::new(agents, 0)
}

/// Population size for the next generation, growing linearly with the mean agent size.
pub fn target_population_size(
    population: &Population,
    params: &EvolutionParams,
    initial_mean_size: f64,
) -> usize {
    let ratio = population.mean_size() / initial_mean_size;
    let raw = (params.base_population as f64 * ratio).round();
    let (lo, hi) = params.size_bounds;
    if raw.is_nan() {
        return params.base_population.clamp(lo, hi);
    }
    (raw.max(0.0) as usize).clamp(lo, hi)
}
