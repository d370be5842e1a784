//! Selection, recombination and mutation, and the generation step built from them.
//!
//! One generation is: parsimony-adjusted fitness → roulette-wheel selection to
//! the dynamic target size → crossover on a quota of the survivors → one point
//! mutation on a quota of the survivors. Quotas are exact: `round(rate · n)`.

use std::ops::RangeInclusive;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use super::agent::{fitness_of_deviation, parsimony_penalty, Agent, Request};
use super::params::EvolutionParams;
use super::population::{target_population_size, Population};
use crate::error::{Error, Result};

/// Number of agents an operator touches for a given rate.
pub fn quota(rate: f64, n: usize) -> usize {
    ((rate * n as f64).round() as usize).min(n)
}

/// Fitness-proportional, non-elitist selection: `target_size` independent draws
/// with replacement, weighted by parsimony fitness.
pub fn select<R: Rng + ?Sized>(
    population: &Population,
    request: &Request,
    parsimony_strength: f64,
    target_size: usize,
    rng: &mut R,
) -> Result<Population> {
    let deviations = population.deviations(request);
    select_by_deviation(
        population,
        &deviations,
        parsimony_strength,
        target_size,
        rng,
    )
}

/// [`select`] with the agents' deviations already computed.
pub fn select_by_deviation<R: Rng + ?Sized>(
    population: &Population,
    deviations: &[u32],
    parsimony_strength: f64,
    target_size: usize,
    rng: &mut R,
) -> Result<Population> {
    if population.is_empty() {
        return Err(Error::Extinct);
    }
    if deviations.len() != population.len() {
        return Err(Error::DimensionMismatch {
            expected: population.len(),
            got: deviations.len(),
        });
    }
    if target_size == 0 {
        return Err(Error::invalid("selection target size must be at least 1"));
    }
    let mean = population.mean_size();
    let weights = population.agents().iter().zip(deviations).map(|(a, &d)| {
        fitness_of_deviation(d) * parsimony_penalty(a.len(), mean, parsimony_strength)
    });
    // Parsimony fitness is strictly positive, so the weights are always valid.
    let wheel = WeightedIndex::new(weights).expect("positive fitness weights");
    let agents = population.agents();
    let chosen = (0..target_size)
        .map(|_| agents[wheel.sample(rng)].clone())
        .collect();
    Ok(Population::new(chosen, population.generation()))
}

/// Variable-length single-point crossover with explicit cut points.
///
/// `cut_a` and `cut_b` are the number of leading attributes each parent keeps
/// (`0..=len`). Tails are swapped. An empty offspring is repaired to the first
/// attribute of the longer parent.
pub fn crossover_pair(a: &Agent, b: &Agent, cut_a: usize, cut_b: usize) -> (Agent, Agent) {
    let (xa, xb) = (a.attributes(), b.attributes());
    assert!(
        cut_a <= xa.len() && cut_b <= xb.len(),
        "cut point out of range"
    );
    let mut first: Vec<u8> = Vec::with_capacity(cut_a + xb.len() - cut_b);
    first.extend_from_slice(&xa[..cut_a]);
    first.extend_from_slice(&xb[cut_b..]);
    let mut second: Vec<u8> = Vec::with_capacity(cut_b + xa.len() - cut_a);
    second.extend_from_slice(&xb[..cut_b]);
    second.extend_from_slice(&xa[cut_a..]);

    let longer = if xa.len() >= xb.len() { xa } else { xb };
    for child in [&mut first, &mut second] {
        if child.is_empty() {
            child.push(longer[0]);
        }
    }
    (
        Agent::from_vec_unchecked(first),
        Agent::from_vec_unchecked(second),
    )
}

/// Recombines `round(rate · n)` randomly chosen agents in random pairs.
///
/// Offspring replace their parents in place; an odd leftover is untouched.
/// Pairs of identical genotypes are left as they are.
pub fn crossover_step<R: Rng + ?Sized>(
    mut population: Population,
    rate: f64,
    rng: &mut R,
) -> Population {
    let n = population.len();
    let k = quota(rate, n);
    if k < 2 {
        return population;
    }
    let mut picked = rand::seq::index::sample(rng, n, k).into_vec();
    picked.shuffle(rng);

    let agents = agents_mut(&mut population);
    for pair in picked.chunks_exact(2) {
        let (i, j) = (pair[0], pair[1]);
        if agents[i] == agents[j] {
            continue;
        }
        let cut_i = rng.gen_range(0..=agents[i].len());
        let cut_j = rng.gen_range(0..=agents[j].len());
        let (ci, cj) = crossover_pair(&agents[i], &agents[j], cut_i, cut_j);
        agents[i] = ci;
        agents[j] = cj;
    }
    population
}

/// Kind of a point mutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointMutation {
    Insert,
    Replace,
    Delete,
}

/// Applies one point mutation of the given kind in place.
///
/// A deletion on a single-attribute agent becomes a replacement.
pub fn apply_point_mutation<R: Rng + ?Sized>(
    agent: &mut Agent,
    kind: PointMutation,
    values: &RangeInclusive<u8>,
    rng: &mut R,
) {
    let attrs = agent.attributes_mut();
    let kind = if kind == PointMutation::Delete && attrs.len() == 1 {
        PointMutation::Replace
    } else {
        kind
    };
    match kind {
        PointMutation::Insert => {
            let at = rng.gen_range(0..=attrs.len());
            attrs.insert(at, rng.gen_range(values.clone()));
        }
        PointMutation::Replace => {
            let at = rng.gen_range(0..attrs.len());
            attrs[at] = rng.gen_range(values.clone());
        }
        PointMutation::Delete => {
            let at = rng.gen_range(0..attrs.len());
            attrs.remove(at);
        }
    }
}

/// Gives exactly one point mutation to each of `round(rate · n)` randomly chosen agents.
pub fn mutate_step<R: Rng + ?Sized>(
    mut population: Population,
    rate: f64,
    values: RangeInclusive<u8>,
    rng: &mut R,
) -> Population {
    let n = population.len();
    let k = quota(rate, n);
    if k == 0 {
        return population;
    }
    let picked = rand::seq::index::sample(rng, n, k);
    let agents = agents_mut(&mut population);
    for i in picked.iter() {
        let kind = match rng.gen_range(0..3u8) {
            0 => PointMutation::Insert,
            1 => PointMutation::Replace,
            _ => PointMutation::Delete,
        };
        apply_point_mutation(&mut agents[i], kind, &values, rng);
    }
    population
}

/// One sampled transition of the population chain.
pub fn generation_step<R: Rng + ?Sized>(
    population: &Population,
    request: &Request,
    params: &EvolutionParams,
    initial_mean_size: f64,
    rng: &mut R,
) -> Result<Population> {
    let deviations = population.deviations(request);
    generation_step_by_deviation(population, &deviations, params, initial_mean_size, rng)
}

/// [`generation_step`] with the current agents' deviations already computed.
pub fn generation_step_by_deviation<R: Rng + ?Sized>(
    population: &Population,
    deviations: &[u32],
    params: &EvolutionParams,
    initial_mean_size: f64,
    rng: &mut R,
) -> Result<Population> {
    let target = target_population_size(population, params, initial_mean_size);
    let survivors = select_by_deviation(
        population,
        deviations,
        params.parsimony_strength,
        target,
        rng,
    )?;
    let crossed = crossover_step(survivors, params.crossover_rate, rng);
    let mutated = mutate_step(
        crossed,
        params.mutation_rate,
        params.attr_lo..=params.attr_hi,
        rng,
    );
    Ok(mutated.with_generation(population.generation() + 1))
}

fn agents_mut(population: &mut Population) -> &mut Vec<Agent> {
    population.agents_vec_mut()
}
