//! Independent evaluators used as ground truth.
//!
//! [`enumerate_outcomes`] walks every realized trajectory explicitly and
//! decides each `(node, K)` from the enumerated futures, without the
//! memoized recursion in [`crate::agents`]. [`monte_carlo`] samples
//! trajectories of a compiled policy with a seeded ChaCha8 generator.

use std::collections::HashMap;

use num::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{Agent, AgentKind, Evaluator};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, TaskGraph};
use crate::scalar::{self, Scalar};

pub const ENUMERATION_NODE_LIMIT: usize = 20;

/// One realized trajectory: the nodes visited (ending at the target or at
/// the node where the agent stopped), its probability, and the costs paid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOutcome {
    pub path: Vec<NodeId>,
    pub prob: Scalar,
    pub total_cost: Scalar,
    pub reached_target: bool,
}

#[derive(Clone)]
struct Suffix {
    path: Vec<usize>,
    prob: Scalar,
    cost: Scalar,
    reached: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Regime {
    Own,
    Sophisticated,
}

struct Enumerator<'a> {
    adj: &'a Adjacency,
    agent: &'a Agent,
    optimal_cv: HashMap<usize, Scalar>,
    labels: Vec<bool>,
}

impl Enumerator<'_> {
    fn stop(v: usize) -> Vec<Suffix> {
        vec![Suffix {
            path: vec![v],
            prob: scalar::one(),
            cost: scalar::zero(),
            reached: false,
        }]
    }

    fn expected(&self, suffixes: &[Suffix]) -> Scalar {
        suffixes
            .iter()
            .map(|s| {
                let gain = if s.reached { self.adj.reward.clone() } else { scalar::zero() };
                &s.prob * (gain - &s.cost)
            })
            .sum()
    }

    /// Every trajectory of continuing from `v`, with `decide` applied at the
    /// successors.
    fn expand(&mut self, v: usize, sunk: &Scalar, decide: Decider) -> Vec<Suffix> {
        let mut all = Vec::new();
        for arc in self.adj.out[v].iter().filter(|a| !a.prob.is_zero()) {
            let step = &self.adj.cost[v] + &arc.cost;
            let next_sunk = sunk + &step;
            for s in self.walk(arc.to, &next_sunk, decide) {
                let mut path = Vec::with_capacity(s.path.len() + 1);
                path.push(v);
                path.extend(s.path);
                all.push(Suffix {
                    path,
                    prob: &arc.prob * s.prob,
                    cost: &step + s.cost,
                    reached: s.reached,
                });
            }
        }
        all
    }

    fn walk(&mut self, v: usize, sunk: &Scalar, decide: Decider) -> Vec<Suffix> {
        if v == self.adj.target {
            return vec![Suffix {
                path: vec![v],
                prob: scalar::one(),
                cost: scalar::zero(),
                reached: true,
            }];
        }
        if self.adj.sink[v] {
            return Enumerator::stop(v);
        }
        let threshold = -(&self.agent.lambda * sunk);
        let tie = self.agent.tie;
        match decide {
            Decider::Optimal => {
                let cont = self.expand(v, sunk, Decider::Optimal);
                let cv = self.expected(&cont);
                if tie.continues(&cv, &scalar::zero()) {
                    cont
                } else {
                    Enumerator::stop(v)
                }
            }
            Decider::Naive => {
                let forecast = self.optimal_continuation(v);
                if tie.continues(&forecast, &threshold) {
                    self.expand(v, sunk, Decider::Naive)
                } else {
                    Enumerator::stop(v)
                }
            }
            Decider::Hybrid(Regime::Own) if self.labels[v] => {
                self.expand(v, sunk, Decider::Hybrid(Regime::Own))
            }
            Decider::Sophisticated | Decider::Hybrid(_) => {
                let next = if decide == Decider::Sophisticated {
                    Decider::Sophisticated
                } else {
                    Decider::Hybrid(Regime::Sophisticated)
                };
                let cont = self.expand(v, sunk, next);
                let cv = self.expected(&cont);
                if tie.continues(&cv, &threshold) {
                    cont
                } else {
                    Enumerator::stop(v)
                }
            }
        }
    }

    fn optimal_continuation(&mut self, v: usize) -> Scalar {
        if let Some(cv) = self.optimal_cv.get(&v) {
            return cv.clone();
        }
        let cont = self.expand(v, &scalar::zero(), Decider::Optimal);
        let cv = self.expected(&cont);
        self.optimal_cv.insert(v, cv.clone());
        cv
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Decider {
    Optimal,
    Naive,
    Sophisticated,
    Hybrid(Regime),
}

/// All realized trajectories of `agent` on `graph` starting at `(start, 0)`.
pub fn enumerate_outcomes(graph: &TaskGraph, agent: &Agent) -> Result<Vec<PathOutcome>> {
    if graph.node_count() > ENUMERATION_NODE_LIMIT {
        return Err(Error::Guard(format!(
            "path enumeration is limited to {ENUMERATION_NODE_LIMIT} nodes, graph has {}",
            graph.node_count()
        )));
    }
    let adj = graph.adjacency()?;
    let mut en = Enumerator {
        adj: &adj,
        agent,
        optimal_cv: HashMap::new(),
        labels: vec![false; adj.len()],
    };
    if agent.kind == AgentKind::Hybrid {
        // Labels: nodes the optimal agent passes through and continues from.
        let optimal = en.walk(adj.start, &scalar::zero(), Decider::Optimal);
        for s in &optimal {
            for &v in &s.path[..s.path.len() - 1] {
                en.labels[v] = true;
            }
        }
    }
    let decide = match agent.kind {
        AgentKind::Optimal => Decider::Optimal,
        AgentKind::Naive => Decider::Naive,
        AgentKind::Sophisticated => Decider::Sophisticated,
        AgentKind::Hybrid => Decider::Hybrid(Regime::Own),
    };
    let suffixes = en.walk(adj.start, &scalar::zero(), decide);
    Ok(suffixes
        .into_iter()
        .map(|s| PathOutcome {
            path: s.path.iter().map(|&v| adj.ids[v].clone()).collect(),
            prob: s.prob,
            total_cost: s.cost,
            reached_target: s.reached,
        })
        .collect())
}

/// `Σ prob · (R·reached − cost)`.
pub fn outcome_payoff(outcomes: &[PathOutcome], reward: &Scalar) -> Scalar {
    outcomes
        .iter()
        .map(|o| {
            let gain = if o.reached_target { reward.clone() } else { scalar::zero() };
            &o.prob * (gain - &o.total_cost)
        })
        .sum()
}

pub fn outcome_mass(outcomes: &[PathOutcome]) -> Scalar {
    outcomes.iter().map(|o| o.prob.clone()).sum()
}

/// `(p(S), E[C|S], E[C|S̄])` from an outcome list; conditional expectations
/// of an empty event are 0.
pub fn split_by_success(outcomes: &[PathOutcome]) -> (Scalar, Scalar, Scalar) {
    let mut p_success = scalar::zero();
    let mut cost_success = scalar::zero();
    let mut p_failure = scalar::zero();
    let mut cost_failure = scalar::zero();
    for o in outcomes {
        if o.reached_target {
            p_success += &o.prob;
            cost_success += &o.prob * &o.total_cost;
        } else {
            p_failure += &o.prob;
            cost_failure += &o.prob * &o.total_cost;
        }
    }
    let cond = |total: Scalar, p: &Scalar| if p.is_zero() { scalar::zero() } else { total / p };
    let e_s = cond(cost_success, &p_success);
    let e_f = cond(cost_failure, &p_failure);
    (p_success, e_s, e_f)
}

/// Sample mean and standard error of the realized payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Simulates `trials` walks of the agent's policy. Deterministic for a fixed
/// seed: the generator is ChaCha8 seeded through `seed_from_u64`, one
/// uniform draw in `[0, 1)` per transition.
pub fn monte_carlo(graph: &TaskGraph, agent: &Agent, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Param("trials must be >= 1".into()));
    }
    let machine = Evaluator::new(graph, agent)?.compile()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford accumulation keeps constant samples exact.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for k in 1..=trials {
        let mut state = 0usize;
        let payoff = loop {
            match &machine.states[state] {
                crate::agents::MachineState::Terminal { payoff } => break *payoff,
                crate::agents::MachineState::Move { branches } => {
                    let u: f64 = rng.gen();
                    state = branches
                        .iter()
                        .find(|(cum, _)| u < *cum)
                        .unwrap_or_else(|| branches.last().expect("continuing state has a branch"))
                        .1;
                }
            }
        };
        let delta = payoff - mean;
        mean += delta / k as f64;
        m2 += delta * (payoff - mean);
    }
    let n = trials as f64;
    let stderr = if trials > 1 {
        (m2 / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        stderr,
        trials,
    })
}

/// Whether an outcome list conserves probability exactly.
pub fn conserves_probability(outcomes: &[PathOutcome]) -> bool {
    outcome_mass(outcomes).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{motivating_example, CostModel, GraphBuilder};
    use crate::scalar::{int, ratio};

    #[test]
    fn motivating_example_optimal_outcomes() {
        let g = motivating_example(&int(1), &int(10));
        let out = enumerate_outcomes(&g, &Agent::optimal()).unwrap();
        assert_eq!(out.len(), 2);
        let reached = out.iter().find(|o| o.reached_target).unwrap();
        assert_eq!(reached.path, vec!["s", "t"]);
        assert_eq!(reached.prob, ratio(1, 2));
        assert_eq!(reached.total_cost, int(4));
        let stopped = out.iter().find(|o| !o.reached_target).unwrap();
        assert_eq!(stopped.path, vec!["s", "u"]);
        assert_eq!(stopped.total_cost, int(4));
        assert_eq!(outcome_payoff(&out, &g.reward), int(1));
        assert!(conserves_probability(&out));
    }

    #[test]
    fn single_edge_single_outcome() {
        let g = GraphBuilder::new(CostModel::NodeCosts)
            .node("s", int(1))
            .node("t", int(0))
            .edge("s", "t", int(1))
            .build("s", "t", int(3));
        let out = enumerate_outcomes(&g, &Agent::optimal()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(outcome_payoff(&out, &g.reward), int(2));
    }

    #[test]
    fn sophisticated_outcomes_on_motivating_example() {
        let g = motivating_example(&int(1), &int(10));
        let out = enumerate_outcomes(&g, &Agent::sophisticated(ratio(1, 2))).unwrap();
        assert_eq!(outcome_payoff(&out, &g.reward), int(0));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn enumeration_guard() {
        let mut b = GraphBuilder::new(CostModel::NodeCosts);
        for i in 0..21 {
            b = b.node(&format!("n{i:02}"), int(0));
        }
        for i in 0..20 {
            b = b.edge(&format!("n{i:02}"), &format!("n{:02}", i + 1), int(1));
        }
        let g = b.build("n00", "n20", int(1));
        assert!(matches!(enumerate_outcomes(&g, &Agent::optimal()), Err(Error::Guard(_))));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let g = motivating_example(&int(1), &int(10));
        let a = monte_carlo(&g, &Agent::optimal(), 1000, 5).unwrap();
        let b = monte_carlo(&g, &Agent::optimal(), 1000, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, monte_carlo(&g, &Agent::optimal(), 1000, 6).unwrap());
    }

    #[test]
    fn deterministic_graph_has_zero_stderr() {
        let g = GraphBuilder::new(CostModel::NodeCosts)
            .node("s", ratio(1, 3))
            .node("m", ratio(1, 7))
            .node("t", int(0))
            .edge("s", "m", int(1))
            .edge("m", "t", int(1))
            .build("s", "t", int(2));
        let est = monte_carlo(&g, &Agent::optimal(), 500, 1).unwrap();
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.mean, scalar::to_f64(&(int(2) - ratio(1, 3) - ratio(1, 7))));
    }

    #[test]
    fn zero_trials_rejected() {
        let g = motivating_example(&int(1), &int(10));
        assert!(monte_carlo(&g, &Agent::optimal(), 0, 1).is_err());
    }
}
