//! On-disk graph format.
//!
//! A UTF-8 JSON document:
//!
//! ```json
//! {
//!   "reward": "10",
//!   "start": "s",
//!   "target": "t",
//!   "cost_model": "node",
//!   "nodes": [{ "id": "s", "cost": "4" }, { "id": "v", "cost": "0", "sink": true }],
//!   "edges": [{ "from": "s", "to": "t", "prob": "1/2" }]
//! }
//! ```
//!
//! Rationals are strings (`"p/q"` or an integer). The canonical form keeps
//! the key order above, sorts nodes by id and edges by `(from, to)`, reduces
//! every rational, and writes edge costs only under the edge cost model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CostModel, Edge, Node, TaskGraph};
use crate::scalar::{self, Scalar};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    reward: String,
    start: String,
    target: String,
    #[serde(default = "default_cost_model")]
    cost_model: String,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    cost: String,
    #[serde(default, skip_serializing_if = "is_false")]
    sink: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: String,
    to: String,
    prob: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<String>,
}

fn default_cost_model() -> String {
    "node".to_string()
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn field(locus: &str, text: &str) -> Result<Scalar> {
    scalar::parse(text).map_err(|e| Error::Parse(format!("{locus}: {e}")))
}

/// Parses and validates a graph document.
pub fn parse_graph(text: &str) -> Result<TaskGraph> {
    let graph = parse_graph_unvalidated(text)?;
    let report = graph.validate();
    if !report.is_ok() {
        return Err(Error::InvalidGraph(report));
    }
    Ok(graph)
}

/// Parses a graph document without checking the structural invariants.
pub fn parse_graph_unvalidated(text: &str) -> Result<TaskGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let cost_model = match doc.cost_model.as_str() {
        "node" => CostModel::NodeCosts,
        "edge" => CostModel::EdgeCosts,
        other => {
            return Err(Error::Parse(format!(
                "cost_model: expected \"node\" or \"edge\", got {other:?}"
            )))
        }
    };
    let nodes = doc
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            Ok(Node {
                id: n.id.clone(),
                cost: field(&format!("nodes[{i}].cost"), &n.cost)?,
                sink: n.sink,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = doc
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Ok(Edge {
                from: e.from.clone(),
                to: e.to.clone(),
                prob: field(&format!("edges[{i}].prob"), &e.prob)?,
                cost: match &e.cost {
                    Some(c) => field(&format!("edges[{i}].cost"), c)?,
                    None => scalar::zero(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TaskGraph {
        nodes,
        edges,
        start: doc.start,
        target: doc.target,
        reward: field("reward", &doc.reward)?,
        cost_model,
    })
}

/// Canonical textual form, newline terminated.
pub fn serialize_graph(graph: &TaskGraph) -> String {
    let g = graph.canonical();
    let edge_costs = g.cost_model == CostModel::EdgeCosts;
    let doc = GraphDoc {
        reward: g.reward.to_string(),
        start: g.start.clone(),
        target: g.target.clone(),
        cost_model: g.cost_model.as_str().to_string(),
        nodes: g
            .nodes
            .iter()
            .map(|n| NodeDoc {
                id: n.id.clone(),
                cost: n.cost.to_string(),
                sink: n.sink,
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| EdgeDoc {
                from: e.from.clone(),
                to: e.to.clone(),
                prob: e.prob.to_string(),
                cost: edge_costs.then(|| e.cost.to_string()),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("graph document serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{motivating_example, GraphBuilder};
    use crate::scalar::{int, ratio};

    const SCB: &str = r#"{
      "reward": "10", "start": "s", "target": "t", "cost_model": "node",
      "nodes": [
        {"id": "s", "cost": "4"}, {"id": "u", "cost": "7"},
        {"id": "v", "cost": "0", "sink": true}, {"id": "t", "cost": "0"}
      ],
      "edges": [
        {"from": "s", "to": "u", "prob": "1/2"}, {"from": "s", "to": "t", "prob": "1/2"},
        {"from": "u", "to": "v", "prob": "1/2"}, {"from": "u", "to": "t", "prob": "1/2"}
      ]
    }"#;

    #[test]
    fn parses_motivating_example() {
        let g = parse_graph(SCB).unwrap();
        assert_eq!(g.node("s").unwrap().cost, int(4));
        assert_eq!(g.node("u").unwrap().cost, int(7));
        assert_eq!(g.canonical(), motivating_example(&int(1), &int(10)).canonical());
    }

    #[test]
    fn probabilities_stay_exact() {
        let text = SCB.replace(r#""prob": "1/2"}, {"from": "s", "to": "t""#, r#""prob": "1/3"}, {"from": "s", "to": "t""#);
        let g = parse_graph_unvalidated(&text).unwrap();
        let e = g.edges.iter().find(|e| e.from == "s" && e.to == "u").unwrap();
        assert_eq!(e.prob, ratio(1, 3));
        assert!(matches!(parse_graph(&text), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn missing_reward_names_the_field() {
        let text = SCB.replace(r#""reward": "10","#, "");
        let err = parse_graph(&text).unwrap_err().to_string();
        assert!(err.contains("reward"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn bad_rational_names_the_locus() {
        let text = SCB.replace(r#""cost": "7""#, r#""cost": "7/0""#);
        let err = parse_graph(&text).unwrap_err().to_string();
        assert!(err.contains("nodes[1].cost"), "{err}");
    }

    #[test]
    fn canonical_output() {
        let g = GraphBuilder::new(CostModel::NodeCosts)
            .node("b", int(1))
            .node("a", int(2))
            .node("t", int(0))
            .edge("b", "t", ratio(2, 4))
            .edge("b", "a", ratio(1, 2))
            .edge("a", "t", int(1))
            .build("b", "t", int(3));
        let text = serialize_graph(&g);
        let a = text.find("\"id\": \"a\"").unwrap();
        let b = text.find("\"id\": \"b\"").unwrap();
        assert!(a < b);
        assert!(text.contains("\"prob\": \"1/2\""));
        assert!(!text.contains("2/4"));
        assert!(!text.contains("sink"));
        let keys = ["\"reward\"", "\"start\"", "\"target\"", "\"cost_model\"", "\"nodes\"", "\"edges\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);
    }

    #[test]
    fn edge_cost_model_keeps_edge_costs() {
        let g = GraphBuilder::new(CostModel::EdgeCosts)
            .node("s", int(0))
            .node("t", int(0))
            .costly_edge("s", "t", int(1), ratio(3, 2))
            .build("s", "t", int(2));
        let text = serialize_graph(&g);
        assert!(text.contains("\"cost_model\": \"edge\""));
        assert!(text.contains("\"cost\": \"3/2\""));
        assert_eq!(parse_graph(&text).unwrap(), g.canonical());
    }
}
