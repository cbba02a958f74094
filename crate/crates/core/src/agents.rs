//! Exact expected-payoff evaluation for the optimal, naive, sophisticated and
//! hybrid agents.
//!
//! All four agents pay the cost of a node when they decide to continue from
//! it and collect the reward on arrival at the target. A stopped agent's
//! future payoff is 0 (its realized payoff is `-K`, the sunk cost). Biased
//! agents with bias `λ` compare a continuation value against `-λK`:
//!
//! * **optimal**: continues iff its continuation value is `≥ 0`; the decision
//!   does not depend on `K`, so there is one state per node.
//! * **sophisticated**: the continuation value anticipates its own future
//!   biased decisions, so states are keyed by `(node, K)`.
//! * **naive**: compares the *optimal* continuation value against `-λK`,
//!   but the realized payoff follows its actual (biased) decisions.
//! * **hybrid**: continues wherever the optimal agent reaches and continues;
//!   once it leaves that region it behaves as the sophisticated agent for
//!   the rest of the walk.
//!
//! Ties are resolved by [`TieBreak`], one rule per evaluation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num::traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, TaskGraph, TieBreak};
use crate::scalar::{self, Scalar};

/// Default cap on distinct memoized states per evaluation.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Optimal,
    Naive,
    Sophisticated,
    Hybrid,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Optimal,
        AgentKind::Naive,
        AgentKind::Sophisticated,
        AgentKind::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Optimal => "optimal",
            AgentKind::Naive => "naive",
            AgentKind::Sophisticated => "sophisticated",
            AgentKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "optimal" => Ok(AgentKind::Optimal),
            "naive" => Ok(AgentKind::Naive),
            "sophisticated" => Ok(AgentKind::Sophisticated),
            "hybrid" => Ok(AgentKind::Hybrid),
            other => Err(format!(
                "unknown agent {other:?} (expected optimal|naive|sophisticated|hybrid)"
            )),
        }
    }
}

/// An agent kind together with its bias and tie rule. `lambda` is ignored by
/// the optimal agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub kind: AgentKind,
    pub lambda: Scalar,
    pub tie: TieBreak,
}

impl Agent {
    pub fn new(kind: AgentKind, lambda: Scalar, tie: TieBreak) -> Result<Agent> {
        if lambda.is_negative() {
            return Err(Error::Param(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Agent { kind, lambda, tie })
    }

    pub fn optimal() -> Agent {
        Agent {
            kind: AgentKind::Optimal,
            lambda: scalar::zero(),
            tie: TieBreak::ContinueOnTie,
        }
    }

    pub fn naive(lambda: Scalar) -> Agent {
        Agent::biased(AgentKind::Naive, lambda)
    }

    pub fn sophisticated(lambda: Scalar) -> Agent {
        Agent::biased(AgentKind::Sophisticated, lambda)
    }

    pub fn hybrid(lambda: Scalar) -> Agent {
        Agent::biased(AgentKind::Hybrid, lambda)
    }

    fn biased(kind: AgentKind, lambda: Scalar) -> Agent {
        assert!(!lambda.is_negative(), "lambda must be >= 0");
        Agent {
            kind,
            lambda,
            tie: TieBreak::ContinueOnTie,
        }
    }

    pub fn with_tie(mut self, tie: TieBreak) -> Agent {
        self.tie = tie;
        self
    }
}

/// Result of evaluating one agent on one graph from `(start, K = 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentEvaluation {
    pub kind: AgentKind,
    /// Expected net payoff.
    pub payoff: Scalar,
    /// Probability of reaching the target.
    pub reach_prob: Scalar,
    /// Whether the agent continues at the start node.
    pub starts: bool,
    /// The value the agent compares against its threshold at the start node
    /// (the continuation value; for the naive agent, the optimal one).
    pub start_value: Scalar,
    pub states_visited: usize,
}

/// Behaviour regime of a state. Only the hybrid agent ever leaves `Own`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Own,
    Sophisticated,
}

/// A position of the walk: node plus the total cost paid so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SunkCostState {
    pub node: usize,
    pub sunk: Scalar,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateValue {
    /// Expected future payoff from this state under the agent's policy.
    pub value: Scalar,
    /// Probability of reaching the target from here.
    pub reach: Scalar,
    pub continues: bool,
    /// The compared value; `None` at the target and at sinks.
    pub compared: Option<Scalar>,
}

impl StateValue {
    fn terminal(value: Scalar, reach: Scalar) -> StateValue {
        StateValue {
            value,
            reach,
            continues: false,
            compared: None,
        }
    }
}

/// Memoized evaluator for one (graph, agent) pair.
pub struct Evaluator {
    adj: Adjacency,
    agent: Agent,
    cap: usize,
    optimal: Vec<StateValue>,
    labels: Vec<bool>,
    memo: HashMap<SunkCostState, StateValue>,
}

impl Evaluator {
    pub fn new(graph: &TaskGraph, agent: &Agent) -> Result<Evaluator> {
        Evaluator::with_cap(graph, agent, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(graph: &TaskGraph, agent: &Agent, cap: usize) -> Result<Evaluator> {
        if agent.lambda.is_negative() {
            return Err(Error::Param(format!("lambda must be >= 0, got {}", agent.lambda)));
        }
        let adj = graph.adjacency()?;
        let optimal = optimal_values(&adj, agent.tie);
        let labels = optimal_labels(&adj, &optimal);
        Ok(Evaluator {
            adj,
            agent: agent.clone(),
            cap,
            optimal,
            labels,
            memo: HashMap::new(),
        })
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn states_visited(&self) -> usize {
        self.memo.len()
    }

    /// Whether the hybrid agent behaves optimally at `node` (the optimal
    /// agent reaches it and continues there).
    pub fn optimal_label(&self, node: usize) -> bool {
        self.labels[node]
    }

    /// Optimal continuation value at `node` (independent of sunk cost).
    pub fn optimal_value(&self, node: usize) -> &StateValue {
        &self.optimal[node]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.adj.ids.iter().position(|n| n == id)
    }

    pub fn evaluate(&mut self) -> Result<AgentEvaluation> {
        let start = self.adj.start;
        let sv = self.value(start, &scalar::zero(), Mode::Own)?;
        Ok(AgentEvaluation {
            kind: self.agent.kind,
            payoff: sv.value.clone(),
            reach_prob: sv.reach.clone(),
            starts: sv.continues,
            start_value: sv.compared.clone().unwrap_or_else(scalar::zero),
            states_visited: self.memo.len(),
        })
    }

    /// Value of the agent standing at `node` having paid `sunk`.
    pub fn state(&mut self, node: &str, sunk: &Scalar) -> Result<StateValue> {
        let idx = self
            .node_index(node)
            .ok_or_else(|| Error::Param(format!("unknown node {node}")))?;
        self.value(idx, sunk, Mode::Own)
    }

    pub fn value(&mut self, node: usize, sunk: &Scalar, mode: Mode) -> Result<StateValue> {
        let key = SunkCostState {
            node,
            sunk: if self.agent.kind == AgentKind::Optimal {
                scalar::zero()
            } else {
                sunk.clone()
            },
            mode,
        };
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let computed = self.compute(node, sunk, mode)?;
        self.memo.insert(key, computed.clone());
        if self.memo.len() > self.cap {
            return Err(Error::StateCap {
                states: self.memo.len(),
                cap: self.cap,
            });
        }
        Ok(computed)
    }

    fn compute(&mut self, node: usize, sunk: &Scalar, mode: Mode) -> Result<StateValue> {
        if node == self.adj.target {
            return Ok(StateValue::terminal(self.adj.reward.clone(), scalar::one()));
        }
        if self.adj.sink[node] {
            return Ok(StateValue::terminal(scalar::zero(), scalar::zero()));
        }
        let threshold = -(&self.agent.lambda * sunk);
        match (self.agent.kind, mode) {
            (AgentKind::Optimal, _) => Ok(self.optimal[node].clone()),
            (AgentKind::Naive, _) => {
                let forecast = self.optimal[node]
                    .compared
                    .clone()
                    .expect("non-terminal node has an optimal continuation value");
                if self.agent.tie.continues(&forecast, &threshold) {
                    let (value, reach) = self.continuation(node, sunk, mode)?;
                    Ok(StateValue {
                        value,
                        reach,
                        continues: true,
                        compared: Some(forecast),
                    })
                } else {
                    Ok(StateValue {
                        value: scalar::zero(),
                        reach: scalar::zero(),
                        continues: false,
                        compared: Some(forecast),
                    })
                }
            }
            (AgentKind::Hybrid, Mode::Own) if self.labels[node] => {
                let (value, reach) = self.continuation(node, sunk, Mode::Own)?;
                Ok(StateValue {
                    value: value.clone(),
                    reach,
                    continues: true,
                    compared: Some(value),
                })
            }
            (AgentKind::Hybrid, Mode::Own) => self.value(node, sunk, Mode::Sophisticated),
            (AgentKind::Sophisticated, _) | (AgentKind::Hybrid, Mode::Sophisticated) => {
                let (cv, reach) = self.continuation(node, sunk, mode)?;
                if self.agent.tie.continues(&cv, &threshold) {
                    Ok(StateValue {
                        value: cv.clone(),
                        reach,
                        continues: true,
                        compared: Some(cv),
                    })
                } else {
                    Ok(StateValue {
                        value: scalar::zero(),
                        reach: scalar::zero(),
                        continues: false,
                        compared: Some(cv),
                    })
                }
            }
        }
    }

    /// Expected future payoff and reach probability of continuing from
    /// `node`, with the agent's own policy applied at every successor.
    fn continuation(&mut self, node: usize, sunk: &Scalar, mode: Mode) -> Result<(Scalar, Scalar)> {
        let node_cost = self.adj.cost[node].clone();
        let paid = sunk + &node_cost;
        let mut value = -node_cost;
        let mut reach = scalar::zero();
        let arcs = self.adj.out[node].clone();
        for arc in arcs.iter().filter(|a| !a.prob.is_zero()) {
            let next = self.value(arc.to, &(&paid + &arc.cost), mode)?;
            value += &arc.prob * (next.value - &arc.cost);
            reach += &arc.prob * next.reach;
        }
        Ok((value, reach))
    }

    /// Decisions at every state reachable from `(start, 0)` under the
    /// agent's policy, in topological order then by sunk cost.
    pub fn trace(&mut self) -> Result<Vec<Decision>> {
        let order = self.adj.topo_order();
        if self.agent.kind == AgentKind::Optimal {
            let mut rows = Vec::new();
            for &v in &order {
                let sv = &self.optimal[v];
                if let Some(cv) = &sv.compared {
                    rows.push(Decision {
                        node: self.adj.ids[v].clone(),
                        sunk: None,
                        mode: Mode::Own,
                        continues: sv.continues,
                        compared: cv.clone(),
                    });
                }
            }
            return Ok(rows);
        }
        let mut rank = vec![0usize; self.adj.len()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        let mut seen: HashSet<SunkCostState> = HashSet::new();
        let mut stack = vec![SunkCostState {
            node: self.adj.start,
            sunk: scalar::zero(),
            mode: Mode::Own,
        }];
        let mut rows: Vec<(usize, Decision)> = Vec::new();
        while let Some(state) = stack.pop() {
            if !seen.insert(state.clone()) {
                continue;
            }
            let mut mode = state.mode;
            if self.agent.kind == AgentKind::Hybrid && mode == Mode::Own && !self.labels[state.node]
            {
                mode = Mode::Sophisticated;
            }
            let sv = self.value(state.node, &state.sunk, mode)?;
            let Some(compared) = sv.compared.clone() else {
                continue;
            };
            rows.push((
                rank[state.node],
                Decision {
                    node: self.adj.ids[state.node].clone(),
                    sunk: Some(state.sunk.clone()),
                    mode,
                    continues: sv.continues,
                    compared,
                },
            ));
            if sv.continues {
                let paid = &state.sunk + &self.adj.cost[state.node];
                for arc in self.adj.out[state.node].iter().filter(|a| !a.prob.is_zero()) {
                    stack.push(SunkCostState {
                        node: arc.to,
                        sunk: &paid + &arc.cost,
                        mode,
                    });
                }
            }
        }
        rows.sort_by(|(ra, a), (rb, b)| {
            ra.cmp(rb)
                .then_with(|| a.sunk.cmp(&b.sunk))
                .then_with(|| a.mode.cmp(&b.mode))
        });
        Ok(rows.into_iter().map(|(_, d)| d).collect())
    }

    /// Flattens the policy into an index-based walk for simulation. Terminal
    /// states carry the realized payoff of ending there.
    pub fn compile(&mut self) -> Result<PolicyMachine> {
        let mut index: HashMap<SunkCostState, usize> = HashMap::new();
        let mut states: Vec<MachineState> = Vec::new();
        let root = SunkCostState {
            node: self.adj.start,
            sunk: scalar::zero(),
            mode: Mode::Own,
        };
        index.insert(root.clone(), 0);
        states.push(MachineState::Terminal { payoff: 0.0 });
        let mut pending = vec![root];
        while let Some(state) = pending.pop() {
            let id = index[&state];
            let sv = self.value(state.node, &state.sunk, state.mode)?;
            let mode = if self.agent.kind == AgentKind::Hybrid
                && state.mode == Mode::Own
                && !self.labels[state.node]
            {
                Mode::Sophisticated
            } else {
                state.mode
            };
            if state.node == self.adj.target {
                let realized = &self.adj.reward - &state.sunk;
                states[id] = MachineState::Terminal {
                    payoff: scalar::to_f64(&realized),
                };
                continue;
            }
            if !sv.continues {
                states[id] = MachineState::Terminal {
                    payoff: -scalar::to_f64(&state.sunk),
                };
                continue;
            }
            let paid = &state.sunk + &self.adj.cost[state.node];
            let mut branches = Vec::new();
            let mut cumulative = scalar::zero();
            for arc in self.adj.out[state.node].iter().filter(|a| !a.prob.is_zero()) {
                let next = SunkCostState {
                    node: arc.to,
                    sunk: &paid + &arc.cost,
                    mode,
                };
                let next_id = match index.get(&next) {
                    Some(&i) => i,
                    None => {
                        let i = states.len();
                        states.push(MachineState::Terminal { payoff: 0.0 });
                        index.insert(next.clone(), i);
                        pending.push(next);
                        i
                    }
                };
                cumulative += &arc.prob;
                branches.push((scalar::to_f64(&cumulative), next_id));
            }
            states[id] = MachineState::Move { branches };
        }
        Ok(PolicyMachine { states })
    }
}

/// One row of a policy trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub node: NodeId,
    /// `None` for the optimal agent, whose decisions ignore sunk cost.
    pub sunk: Option<Scalar>,
    pub mode: Mode,
    pub continues: bool,
    pub compared: Scalar,
}

/// Policy as an explicit walk over reachable states; state 0 is the start.
#[derive(Debug, Clone)]
pub struct PolicyMachine {
    pub states: Vec<MachineState>,
}

#[derive(Debug, Clone)]
pub enum MachineState {
    Terminal { payoff: f64 },
    /// Cumulative probabilities paired with successor states.
    Move { branches: Vec<(f64, usize)> },
}

/// Optimal backward induction over the DAG, one value per node.
fn optimal_values(adj: &Adjacency, tie: TieBreak) -> Vec<StateValue> {
    let mut values: Vec<Option<StateValue>> = vec![None; adj.len()];
    for &v in adj.topo_order().iter().rev() {
        let sv = if v == adj.target {
            StateValue::terminal(adj.reward.clone(), scalar::one())
        } else if adj.sink[v] {
            StateValue::terminal(scalar::zero(), scalar::zero())
        } else {
            let mut cv = -adj.cost[v].clone();
            let mut reach = scalar::zero();
            for arc in &adj.out[v] {
                let next = values[arc.to].as_ref().expect("successors come later");
                cv += &arc.prob * (&next.value - &arc.cost);
                reach += &arc.prob * &next.reach;
            }
            let continues = tie.continues(&cv, &scalar::zero());
            StateValue {
                value: if continues { cv.clone() } else { scalar::zero() },
                reach: if continues { reach } else { scalar::zero() },
                continues,
                compared: Some(cv),
            }
        };
        values[v] = Some(sv);
    }
    values.into_iter().map(|v| v.expect("every node visited")).collect()
}

/// Nodes the optimal agent reaches (with positive probability) and
/// continues from.
fn optimal_labels(adj: &Adjacency, optimal: &[StateValue]) -> Vec<bool> {
    let mut reached = vec![false; adj.len()];
    reached[adj.start] = true;
    for &v in &adj.topo_order() {
        if reached[v] && optimal[v].continues {
            for arc in adj.out[v].iter().filter(|a| !a.prob.is_zero()) {
                reached[arc.to] = true;
            }
        }
    }
    (0..adj.len())
        .map(|v| reached[v] && optimal[v].continues)
        .collect()
}

pub fn evaluate(graph: &TaskGraph, agent: &Agent) -> Result<AgentEvaluation> {
    Evaluator::new(graph, agent)?.evaluate()
}

pub fn evaluate_with_cap(graph: &TaskGraph, agent: &Agent, cap: usize) -> Result<AgentEvaluation> {
    Evaluator::with_cap(graph, agent, cap)?.evaluate()
}

pub fn eval_optimal(graph: &TaskGraph) -> Result<AgentEvaluation> {
    evaluate(graph, &Agent::optimal())
}

pub fn eval_sophisticated(graph: &TaskGraph, lambda: &Scalar, tie: TieBreak) -> Result<AgentEvaluation> {
    evaluate(graph, &Agent::new(AgentKind::Sophisticated, lambda.clone(), tie)?)
}

pub fn eval_naive(graph: &TaskGraph, lambda: &Scalar, tie: TieBreak) -> Result<AgentEvaluation> {
    evaluate(graph, &Agent::new(AgentKind::Naive, lambda.clone(), tie)?)
}

pub fn eval_hybrid(graph: &TaskGraph, lambda: &Scalar, tie: TieBreak) -> Result<AgentEvaluation> {
    evaluate(graph, &Agent::new(AgentKind::Hybrid, lambda.clone(), tie)?)
}

pub fn policy_trace(graph: &TaskGraph, agent: &Agent) -> Result<Vec<Decision>> {
    Evaluator::new(graph, agent)?.trace()
}

/// CSV header for [`trace_csv_row`].
pub const TRACE_CSV_HEADER: &str = "node,sunk,mode,decision,compared";

pub fn trace_csv_row(d: &Decision) -> String {
    format!(
        "{},{},{},{},{}",
        d.node,
        d.sunk.as_ref().map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        match d.mode {
            Mode::Own => "own",
            Mode::Sophisticated => "sophisticated",
        },
        if d.continues { "continue" } else { "stop" },
        d.compared
    )
}
