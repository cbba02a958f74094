//! Seeded random task graphs.
//!
//! Every generator draws from a caller-owned [`ChaCha8Rng`], so a seed fixes
//! the whole instance sequence.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CostModel, Edge, Node, TaskGraph};
use crate::scalar::{self, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational `a/b` with `b ∈ 1..=max_den` and `a ∈ 0..=b`.
pub fn unit_rational(rng: &mut ChaCha8Rng, max_den: i64) -> Scalar {
    let b = rng.gen_range(1..=max_den);
    let a = rng.gen_range(0..=b);
    scalar::ratio(a, b)
}

/// Probabilities proportional to small integer weights, summing to exactly 1.
pub fn split_unit(rng: &mut ChaCha8Rng, parts: usize) -> Vec<Scalar> {
    let weights: Vec<i64> = (0..parts).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    weights.iter().map(|&w| scalar::ratio(w, total)).collect()
}

/// Random DAG with `3..=max_nodes` nodes. Node `n00` is the start and the
/// highest-numbered node the target; edges only point forward, a few nodes
/// are dead ends, and about one graph in five uses edge costs.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> TaskGraph {
    let k = rng.gen_range(3..=max_nodes.max(3));
    let target = k - 1;
    let id = |i: usize| format!("n{i:02}");
    let sink: Vec<bool> = (0..k)
        .map(|i| i != 0 && i != target && rng.gen_bool(0.15))
        .collect();
    let edge_model = rng.gen_bool(0.2);
    let reward_units: i64 = rng.gen_range(1..=12);
    let reward = scalar::int(reward_units);
    let span = ((k - 1) / 2).max(1) as i64;
    let draw_cost = |rng: &mut ChaCha8Rng| scalar::ratio(reward_units * rng.gen_range(0..=8), 4 * span);

    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for i in 0..target {
        if sink[i] {
            continue;
        }
        let live: Vec<usize> = (i + 1..k).filter(|&j| !sink[j]).collect();
        succ[i].insert(live[rng.gen_range(0..live.len())]);
        let extra = rng.gen_range(0..=2);
        for _ in 0..extra {
            succ[i].insert(rng.gen_range(i + 1..k));
        }
    }
    for j in 1..k {
        if !succ.iter().any(|s| s.contains(&j)) {
            let parents: Vec<usize> = (0..j).filter(|&i| !sink[i]).collect();
            let p = parents[rng.gen_range(0..parents.len())];
            succ[p].insert(j);
        }
    }

    let mut nodes = Vec::with_capacity(k);
    for (i, &is_sink) in sink.iter().enumerate() {
        let cost = if i == target || is_sink || edge_model {
            scalar::zero()
        } else {
            draw_cost(rng)
        };
        nodes.push(Node {
            id: id(i),
            cost,
            sink: is_sink,
        });
    }
    let mut edges = Vec::new();
    for (i, next) in succ.iter().enumerate() {
        let targets: Vec<usize> = next.iter().copied().collect();
        if targets.is_empty() {
            continue;
        }
        let probs = split_unit(rng, targets.len());
        for (j, prob) in targets.into_iter().zip(probs) {
            let cost = if edge_model { draw_cost(rng) } else { scalar::zero() };
            edges.push(Edge {
                from: id(i),
                to: id(j),
                prob,
                cost,
            });
        }
    }
    TaskGraph {
        nodes,
        edges,
        start: id(0),
        target: id(target),
        reward,
        cost_model: if edge_model {
            CostModel::EdgeCosts
        } else {
            CostModel::NodeCosts
        },
    }
}
