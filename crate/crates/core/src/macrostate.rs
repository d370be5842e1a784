//! Macro-states of a population, their occupation probabilities, and the
//! stability verdict and degree of instability computed from them.
//!
//! A population's macro-state is the best (smallest) deviation among its
//! agents, so labels are exact fitness levels `1 / (1 + d)`: `d = 0` is the
//! maximum macro-state, `d = 1` the half-fitness one, `d = 9` a tenth and
//! `d = 19` a twentieth. An empty population is [`MacroStateLabel::Extinct`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::{deviation, Population, Request};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MacroStateLabel {
    /// Best deviation over the population's agents.
    Deviation(u32),
    Extinct,
}

impl MacroStateLabel {
    pub const MAX: Self = Self::Deviation(0);
    pub const HALF: Self = Self::Deviation(1);
    pub const TENTH: Self = Self::Deviation(9);
    pub const TWENTIETH: Self = Self::Deviation(19);

    /// Best fitness of populations in this macro-state; 0 when extinct.
    pub fn fitness(self) -> f64 {
        match self {
            Self::Deviation(d) => 1.0 / (1.0 + f64::from(d)),
            Self::Extinct => 0.0,
        }
    }
}

impl fmt::Display for MacroStateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Deviation(d) => write!(f, "{d}"),
            Self::Extinct => f.write_str("EXTINCT"),
        }
    }
}

impl FromStr for MacroStateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "EXTINCT" {
            return Ok(Self::Extinct);
        }
        s.parse()
            .map(Self::Deviation)
            .map_err(|_| Error::invalid(format!("not a macro-state label: {s:?}")))
    }
}

/// Macro-state of a population under a request.
pub fn classify(population: &Population, request: &Request) -> MacroStateLabel {
    population
        .agents()
        .iter()
        .map(|a| deviation(a, request))
        .min()
        .map_or(MacroStateLabel::Extinct, MacroStateLabel::Deviation)
}

/// Occupation probabilities over macro-state labels at one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroStateDistribution {
    pub generation: u64,
    pub probabilities: BTreeMap<MacroStateLabel, f64>,
}

impl MacroStateDistribution {
    /// Probability of `label`, zero when absent.
    pub fn p(&self, label: MacroStateLabel) -> f64 {
        self.probabilities.get(&label).copied().unwrap_or(0.0)
    }

    /// Labels carrying nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = MacroStateLabel> + '_ {
        self.probabilities
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&l, _)| l)
    }

    /// Empirical distribution of a sample of labels.
    pub fn from_labels<I>(generation: u64, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = MacroStateLabel>,
    {
        let mut counts: BTreeMap<MacroStateLabel, u64> = BTreeMap::new();
        let mut total = 0u64;
        for l in labels {
            *counts.entry(l).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::invalid("no labels to estimate occupation from"));
        }
        let probabilities = counts
            .into_iter()
            .map(|(l, c)| (l, c as f64 / total as f64))
            .collect();
        Ok(Self {
            generation,
            probabilities,
        })
    }
}

/// Total-variation distance between two distributions.
pub fn total_variation(a: &MacroStateDistribution, b: &MacroStateDistribution) -> f64 {
    let labels: BTreeSet<_> = a
        .probabilities
        .keys()
        .chain(b.probabilities.keys())
        .collect();
    0.5 * labels
        .into_iter()
        .map(|&l| (a.p(l) - b.p(l)).abs())
        .sum::<f64>()
}

/// Ensemble estimate of the occupation probabilities at one generation.
///
/// Each entry is one run's `(generation, label)`; all runs must report the same generation.
pub fn occupation_estimate(snapshots: &[(u64, MacroStateLabel)]) -> Result<MacroStateDistribution> {
    let (generation, _) = *snapshots
        .first()
        .ok_or_else(|| Error::invalid("occupation estimate needs at least one run"))?;
    if let Some((g, _)) = snapshots.iter().find(|(g, _)| *g != generation) {
        return Err(Error::invalid(format!(
            "runs report different generations ({generation} and {g})"
        )));
    }
    MacroStateDistribution::from_labels(generation, snapshots.iter().map(|(_, l)| *l))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub converged: bool,
    pub nonuniform: bool,
    pub stable: bool,
    pub limit: MacroStateDistribution,
    /// Largest total-variation step between consecutive distributions in the window.
    pub max_tv_delta_tail: f64,
}

/// Labels with nonzero probability anywhere in `dists`, padded with a
/// zero-probability placeholder label so the universe always has at least two.
pub fn label_universe<'a, I>(dists: I) -> BTreeSet<MacroStateLabel>
where
    I: IntoIterator<Item = &'a MacroStateDistribution>,
{
    let mut universe: BTreeSet<_> = dists.into_iter().flat_map(|d| d.support()).collect();
    let mut filler = 0;
    while universe.len() < 2 {
        universe.insert(MacroStateLabel::Deviation(filler));
        filler += 1;
    }
    universe
}

/// Decides whether the occupation probabilities converged to a non-uniform limit.
///
/// Converged when no consecutive pair within the final `window` distributions
/// moves more than `tol` in total variation. Non-uniform when two labels of the
/// trajectory's label universe differ by more than `tol` in the final distribution.
pub fn stability_verdict(
    trajectory: &[MacroStateDistribution],
    window: usize,
    tol: f64,
) -> Result<StabilityVerdict> {
    if window < 2 {
        return Err(Error::invalid(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if trajectory.len() <= window {
        return Err(Error::invalid(format!(
            "trajectory of {} distributions is too short for a window of {window}",
            trajectory.len()
        )));
    }
    let tail = &trajectory[trajectory.len() - window..];
    let max_tv_delta_tail = tail
        .windows(2)
        .map(|w| total_variation(&w[0], &w[1]))
        .fold(0.0, f64::max);
    let converged = max_tv_delta_tail <= tol;

    let limit = tail.last().expect("window is non-empty").clone();
    let (lo, hi) = label_universe(trajectory)
        .into_iter()
        .map(|l| limit.p(l))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p), hi.max(p))
        });
    let nonuniform = hi - lo > tol;

    Ok(StabilityVerdict {
        converged,
        nonuniform,
        stable: converged && nonuniform,
        limit,
        max_tv_delta_tail,
    })
}

/// Normalised entropy `-Σ p log_N p` of a limit distribution.
pub fn degree_of_instability(limit: &MacroStateDistribution, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "degree of instability needs N >= 2, got {n}"
        )));
    }
    let ln_n = (n as f64).ln();
    let h: f64 = limit
        .probabilities
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln() / ln_n)
        .sum();
    // clear rounding noise around the endpoints; adding 0.0 turns -0.0 into 0.0
    Ok(h.clamp(0.0, 1.0) + 0.0)
}

/// Number of labels used as the entropy base: the support size, at least 2.
pub fn entropy_base<'a, I>(dists: I) -> usize
where
    I: IntoIterator<Item = &'a MacroStateDistribution>,
{
    let support: BTreeSet<_> = dists.into_iter().flat_map(|d| d.support()).collect();
    support.len().max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Agent;
    use MacroStateLabel::{Deviation, Extinct};

    fn dist(g: u64, entries: &[(MacroStateLabel, f64)]) -> MacroStateDistribution {
        MacroStateDistribution {
            generation: g,
            probabilities: entries.iter().copied().collect(),
        }
    }

    fn pop(agents: &[&[u8]]) -> Population {
        Population::new(
            agents
                .iter()
                .map(|a| Agent::new(a.to_vec()).unwrap())
                .collect(),
            0,
        )
    }

    #[test]
    fn classify_examples() {
        let r = Request::new(vec![10, 20]).unwrap();
        assert_eq!(
            classify(&pop(&[&[1], &[10, 20, 30]]), &r),
            MacroStateLabel::MAX
        );
        assert_eq!(
            classify(&pop(&[&[11, 20], &[50]]), &r),
            MacroStateLabel::HALF
        );
        assert_eq!(MacroStateLabel::HALF.fitness(), 0.5);
        assert_eq!(classify(&pop(&[]), &r), Extinct);
    }

    #[test]
    fn labels_round_trip_text() {
        for l in [Deviation(0), Deviation(17), Extinct] {
            assert_eq!(l.to_string().parse::<MacroStateLabel>().unwrap(), l);
        }
        assert!("x".parse::<MacroStateLabel>().is_err());
    }

    #[test]
    fn occupation_counts() {
        let d = occupation_estimate(&[
            (5, Deviation(0)),
            (5, Deviation(0)),
            (5, Deviation(1)),
            (5, Deviation(3)),
        ])
        .unwrap();
        assert_eq!(d.p(Deviation(0)), 0.5);
        assert_eq!(d.p(Deviation(1)), 0.25);
        assert_eq!(d.p(Deviation(3)), 0.25);
        assert_eq!(d.generation, 5);

        let unit = occupation_estimate(&[(9, Deviation(4))]).unwrap();
        assert_eq!(unit.p(Deviation(4)), 1.0);

        let all_max = occupation_estimate(&[(1000, Deviation(0)); 10]).unwrap();
        assert_eq!(all_max.p(MacroStateLabel::MAX), 1.0);
    }

    #[test]
    fn occupation_rejects_bad_input() {
        assert!(occupation_estimate(&[]).is_err());
        assert!(occupation_estimate(&[(1, Deviation(0)), (2, Deviation(0))]).is_err());
    }

    #[test]
    fn verdict_constant_unit_mass_is_stable() {
        let traj: Vec<_> = (0..60).map(|g| dist(g, &[(Deviation(0), 1.0)])).collect();
        let v = stability_verdict(&traj, 50, 1e-3).unwrap();
        assert!(v.converged && v.nonuniform && v.stable);
        assert_eq!(v.max_tv_delta_tail, 0.0);
    }

    #[test]
    fn verdict_oscillation_is_not_converged() {
        let a = [(Deviation(0), 0.6), (Deviation(1), 0.4)];
        let b = [(Deviation(0), 0.4), (Deviation(1), 0.6)];
        let traj: Vec<_> = (0..60)
            .map(|g| if g % 2 == 0 { dist(g, &a) } else { dist(g, &b) })
            .collect();
        let v = stability_verdict(&traj, 50, 1e-3).unwrap();
        assert!(!v.converged);
        assert!((v.max_tv_delta_tail - 0.2).abs() < 1e-12);
    }

    #[test]
    fn verdict_uniform_limit_is_unstable() {
        let u = [(Deviation(0), 0.5), (Deviation(1), 0.5)];
        let traj: Vec<_> = (0..60).map(|g| dist(g, &u)).collect();
        let v = stability_verdict(&traj, 50, 1e-3).unwrap();
        assert!(v.converged);
        assert!(!v.nonuniform);
        assert!(!v.stable);
    }

    #[test]
    fn verdict_rejects_short_trajectories() {
        let traj: Vec<_> = (0..10).map(|g| dist(g, &[(Deviation(0), 1.0)])).collect();
        assert!(stability_verdict(&traj, 10, 1e-3).is_err());
        assert!(stability_verdict(&traj, 1, 1e-3).is_err());
    }

    #[test]
    fn entropy_examples() {
        let unit = dist(0, &[(Deviation(0), 1.0)]);
        assert_eq!(degree_of_instability(&unit, 2).unwrap(), 0.0);
        assert!(degree_of_instability(&unit, 2).unwrap().is_sign_positive());
        let u4 = dist(
            0,
            &[
                (Deviation(0), 0.25),
                (Deviation(1), 0.25),
                (Deviation(2), 0.25),
                (Deviation(3), 0.25),
            ],
        );
        assert!((degree_of_instability(&u4, 4).unwrap() - 1.0).abs() < 1e-12);
        let half = dist(0, &[(Deviation(0), 0.5), (Deviation(1), 0.5)]);
        assert!((degree_of_instability(&half, 4).unwrap() - 0.5).abs() < 1e-12);
        assert!(degree_of_instability(&half, 1).is_err());
    }

    #[test]
    fn entropy_base_has_floor_two() {
        let unit = dist(0, &[(Deviation(0), 1.0), (Deviation(5), 0.0)]);
        assert_eq!(entropy_base([&unit]), 2);
        let three = dist(
            0,
            &[(Deviation(0), 0.5), (Deviation(1), 0.25), (Extinct, 0.25)],
        );
        assert_eq!(entropy_base([&unit, &three]), 3);
    }
}
