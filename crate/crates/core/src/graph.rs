//! Task graphs: a DAG the agent walks from `start` toward `target`, paying
//! costs on nodes (or on edges) and collecting the reward on arrival.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub type NodeId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CostModel {
    #[default]
    NodeCosts,
    EdgeCosts,
}

impl CostModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CostModel::NodeCosts => "node",
            CostModel::EdgeCosts => "edge",
        }
    }
}

/// Decision at an exact threshold equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieBreak {
    #[default]
    ContinueOnTie,
    StopOnTie,
}

impl TieBreak {
    /// `value` against `threshold` under this rule.
    pub fn continues(self, value: &Scalar, threshold: &Scalar) -> bool {
        match self {
            TieBreak::ContinueOnTie => value >= threshold,
            TieBreak::StopOnTie => value > threshold,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TieBreak::ContinueOnTie => "continue",
            TieBreak::StopOnTie => "stop",
        }
    }
}

impl std::str::FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "continue" => Ok(TieBreak::ContinueOnTie),
            "stop" => Ok(TieBreak::StopOnTie),
            other => Err(format!("unknown tie rule {other:?} (expected continue|stop)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub cost: Scalar,
    /// Dead end: reaching it forces the agent to stop.
    pub sink: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub prob: Scalar,
    pub cost: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub start: NodeId,
    pub target: NodeId,
    pub reward: Scalar,
    pub cost_model: CostModel,
}

/// One broken invariant, located at a node or edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub locus: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, locus: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            locus: locus.into(),
            message: message.into(),
        });
    }

    /// Whether any violation message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Outgoing transition in index form.
#[derive(Debug, Clone)]
pub struct Arc {
    pub to: usize,
    pub prob: Scalar,
    pub cost: Scalar,
}

/// Index-based view of a validated graph used by the evaluators.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub ids: Vec<NodeId>,
    pub cost: Vec<Scalar>,
    pub sink: Vec<bool>,
    pub out: Vec<Vec<Arc>>,
    pub start: usize,
    pub target: usize,
    pub reward: Scalar,
}

impl Adjacency {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Node indices in topological order (sources first).
    pub fn topo_order(&self) -> Vec<usize> {
        topo_sort(self.len(), &self.out).expect("adjacency built from a validated DAG")
    }
}

fn topo_sort(n: usize, out: &[Vec<Arc>]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    for arcs in out {
        for a in arcs {
            indeg[a.to] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for a in &out[v] {
            indeg[a.to] -= 1;
            if indeg[a.to] == 0 {
                ready.push(a.to);
            }
        }
    }
    (order.len() == n).then_some(order)
}

impl TaskGraph {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Checks every structural invariant; violations are returned as data.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id.as_str(), i).is_some() {
                report.push(format!("node {}", n.id), "duplicate node id");
            }
            if n.cost.is_negative() {
                report.push(format!("node {}", n.id), "negative cost");
            }
            if self.cost_model == CostModel::EdgeCosts && !n.cost.is_zero() {
                report.push(
                    format!("node {}", n.id),
                    "node cost must be 0 under the edge cost model",
                );
            }
        }
        if self.reward.is_negative() {
            report.push("reward", "negative reward");
        }
        let start = index.get(self.start.as_str()).copied();
        let target = index.get(self.target.as_str()).copied();
        if start.is_none() {
            report.push("start", format!("unknown start node {}", self.start));
        }
        if target.is_none() {
            report.push("target", format!("unknown target node {}", self.target));
        }
        if start.is_some() && start == target {
            report.push("start", "start equals target");
        }

        let n = self.nodes.len();
        let mut out: Vec<Vec<Arc>> = vec![Vec::new(); n];
        let mut seen_pairs: HashMap<(usize, usize), ()> = HashMap::new();
        for e in &self.edges {
            let locus = format!("edge {}->{}", e.from, e.to);
            let (Some(&f), Some(&t)) = (index.get(e.from.as_str()), index.get(e.to.as_str()))
            else {
                report.push(locus, "edge references an unknown node");
                continue;
            };
            if f == t {
                report.push(locus.clone(), "self loop (cycle)");
            }
            if seen_pairs.insert((f, t), ()).is_some() {
                report.push(locus.clone(), "duplicate edge");
            }
            if e.prob.is_negative() || e.prob > scalar::one() {
                report.push(locus.clone(), "probability outside [0, 1]");
            }
            if e.cost.is_negative() {
                report.push(locus.clone(), "negative edge cost");
            }
            if self.cost_model == CostModel::NodeCosts && !e.cost.is_zero() {
                report.push(locus, "edge cost must be 0 under the node cost model");
            }
            out[f].push(Arc {
                to: t,
                prob: e.prob.clone(),
                cost: e.cost.clone(),
            });
        }

        if let Some(t) = target {
            for a in &out[t] {
                report.push(
                    format!("node {}", self.nodes[t].id),
                    format!("target has outgoing edge to {}", self.nodes[a.to].id),
                );
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if Some(i) == target {
                continue;
            }
            let locus = format!("node {}", node.id);
            if node.sink {
                if !out[i].is_empty() {
                    report.push(locus, "sink node has outgoing edges");
                }
                continue;
            }
            if out[i].is_empty() {
                report.push(locus, "non-target node without outgoing edges (mark it as a sink)");
                continue;
            }
            let total: Scalar = out[i].iter().map(|a| a.prob.clone()).sum();
            if !total.is_one() {
                report.push(locus, format!("probabilities sum to {total} ≠ 1"));
            }
        }

        let no_self_loops = out
            .iter()
            .enumerate()
            .all(|(i, arcs)| arcs.iter().all(|a| a.to != i));
        if topo_sort(n, &out).is_none() && no_self_loops {
            report.push("graph", "edge relation contains a cycle");
        }

        if let Some(s) = start {
            let reach = reachable(s, &out);
            for (i, node) in self.nodes.iter().enumerate() {
                if !reach[i] {
                    report.push(format!("node {}", node.id), "not reachable from start");
                }
            }
        }
        if let Some(t) = target {
            let mut rev: Vec<Vec<Arc>> = vec![Vec::new(); n];
            for (f, arcs) in out.iter().enumerate() {
                for a in arcs {
                    rev[a.to].push(Arc {
                        to: f,
                        prob: a.prob.clone(),
                        cost: a.cost.clone(),
                    });
                }
            }
            let co = reachable(t, &rev);
            for (i, node) in self.nodes.iter().enumerate() {
                if !out[i].is_empty() && !co[i] {
                    report.push(format!("node {}", node.id), "target not reachable");
                }
            }
        }
        report
    }

    /// Builds the evaluator view, failing on any validation violation.
    pub fn adjacency(&self) -> Result<Adjacency> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(Error::InvalidGraph(report));
        }
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut out: Vec<Vec<Arc>> = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            out[index[e.from.as_str()]].push(Arc {
                to: index[e.to.as_str()],
                prob: e.prob.clone(),
                cost: e.cost.clone(),
            });
        }
        Ok(Adjacency {
            ids: self.nodes.iter().map(|n| n.id.clone()).collect(),
            cost: self.nodes.iter().map(|n| n.cost.clone()).collect(),
            sink: self.nodes.iter().map(|n| n.sink).collect(),
            out,
            start: index[self.start.as_str()],
            target: index[self.target.as_str()],
            reward: self.reward.clone(),
        })
    }

    /// Multiplies every cost and the reward by `factor`.
    pub fn scale(&self, factor: &Scalar) -> Result<TaskGraph> {
        if !factor.is_positive() {
            return Err(Error::Param(format!("scale factor must be > 0, got {factor}")));
        }
        let mut g = self.clone();
        for n in &mut g.nodes {
            n.cost *= factor;
        }
        for e in &mut g.edges {
            e.cost *= factor;
        }
        g.reward *= factor;
        Ok(g)
    }

    /// Canonical ordering: nodes by id, edges by (from, to).
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        self.edges
            .sort_by(|a, b| (a.from.as_str(), a.to.as_str()).cmp(&(b.from.as_str(), b.to.as_str())));
    }

    pub fn canonical(&self) -> TaskGraph {
        let mut g = self.clone();
        g.canonicalize();
        g
    }

    /// Node costs keyed by id.
    pub fn costs(&self) -> BTreeMap<&str, &Scalar> {
        self.nodes.iter().map(|n| (n.id.as_str(), &n.cost)).collect()
    }
}

fn reachable(from: usize, out: &[Vec<Arc>]) -> Vec<bool> {
    let mut seen = vec![false; out.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for a in &out[v] {
            if !seen[a.to] {
                seen[a.to] = true;
                stack.push(a.to);
            }
        }
    }
    seen
}

/// Small builder used by the instance constructors.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    graph_nodes: Vec<Node>,
    graph_edges: Vec<Edge>,
    cost_model: CostModel,
}

impl GraphBuilder {
    pub fn new(cost_model: CostModel) -> Self {
        GraphBuilder {
            cost_model,
            ..Default::default()
        }
    }

    pub fn node(mut self, id: &str, cost: Scalar) -> Self {
        self.graph_nodes.push(Node {
            id: id.to_string(),
            cost,
            sink: false,
        });
        self
    }

    pub fn sink(mut self, id: &str) -> Self {
        self.graph_nodes.push(Node {
            id: id.to_string(),
            cost: scalar::zero(),
            sink: true,
        });
        self
    }

    pub fn edge(mut self, from: &str, to: &str, prob: Scalar) -> Self {
        self.graph_edges.push(Edge {
            from: from.to_string(),
            to: to.to_string(),
            prob,
            cost: scalar::zero(),
        });
        self
    }

    pub fn costly_edge(mut self, from: &str, to: &str, prob: Scalar, cost: Scalar) -> Self {
        self.graph_edges.push(Edge {
            from: from.to_string(),
            to: to.to_string(),
            prob,
            cost,
        });
        self
    }

    pub fn build(self, start: &str, target: &str, reward: Scalar) -> TaskGraph {
        TaskGraph {
            nodes: self.graph_nodes,
            edges: self.graph_edges,
            start: start.to_string(),
            target: target.to_string(),
            reward,
            cost_model: self.cost_model,
        }
    }
}

/// The motivating four-node example: `s` (cost 4W) branches evenly to `u`
/// (cost 7W) and `t`; `u` branches evenly to the dead end `v` and `t`.
pub fn motivating_example(w: &Scalar, reward: &Scalar) -> TaskGraph {
    let half = scalar::ratio(1, 2);
    GraphBuilder::new(CostModel::NodeCosts)
        .node("s", scalar::int(4) * w)
        .node("u", scalar::int(7) * w)
        .sink("v")
        .node("t", scalar::zero())
        .edge("s", "u", half.clone())
        .edge("s", "t", half.clone())
        .edge("u", "v", half.clone())
        .edge("u", "t", half)
        .build("s", "t", reward.clone())
}
