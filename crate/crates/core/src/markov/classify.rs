use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::matrix::StochasticMatrix;

/// Communication structure of a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainClassification {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of each state; `None` for a state the chain can never return to.
    pub period_per_state: Vec<Option<u64>>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Irreducibility and per-state periods from the graph of nonzero entries.
///
/// The period of a state is the gcd of the lengths of all cycles through it.
/// Within one strongly connected component, a BFS level assignment gives it
/// as the gcd of `level(u) + 1 − level(v)` over the component's edges `u → v`.
pub fn classify(p: &StochasticMatrix) -> ChainClassification {
    let n = p.n();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if p.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let components = tarjan_scc(&graph);

    let mut component_of = vec![0usize; n];
    for (c, members) in components.iter().enumerate() {
        for v in members {
            component_of[v.index()] = c;
        }
    }

    let mut period_per_state = vec![None; n];
    let mut level = vec![u64::MAX; n];
    for (c, members) in components.iter().enumerate() {
        let root = members[0].index();
        level[root] = 0;
        let mut queue = VecDeque::from([root]);
        let mut period = 0u64;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if p.get(u, v) == 0.0 || component_of[v] != c {
                    continue;
                }
                if level[v] == u64::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    period = gcd(period, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        let period = (period > 0).then_some(period);
        for v in members {
            period_per_state[v.index()] = period;
        }
    }

    ChainClassification {
        irreducible: components.len() == 1,
        aperiodic: period_per_state.iter().all(|&p| p == Some(1)),
        period_per_state,
    }
}
