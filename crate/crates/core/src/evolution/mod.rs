//! Attribute-vector agents evolving under a request-derived fitness.

mod agent;
mod operators;
mod params;
mod population;

pub use agent::{
    deviation, fitness, fitness_of_deviation, parsimony_fitness, parsimony_penalty, Agent, Request,
    ATTR_MAX, ATTR_MIN,
};
pub use operators::{
    apply_point_mutation, crossover_pair, crossover_step, generation_step,
    generation_step_by_deviation, mutate_step, quota, select, select_by_deviation, PointMutation,
};
pub(crate) use params::check_rate;
pub use params::EvolutionParams;
pub use population::{init_population, target_population_size, FitnessSummary, Population};
