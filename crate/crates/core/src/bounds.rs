//! Optimal-payoff decomposition and the general lower bounds on the
//! sophisticated agent's payoff.
//!
//! With `S` the event that the optimal agent reaches the target,
//!
//! ```text
//! π_o = p(S)·R − p(S)·E[C|S] − (1 − p(S))·E[C|S̄]
//! ```
//!
//! and the sophisticated payoff is bounded below by
//!
//! | bound                     | right-hand side                      |
//! |---------------------------|--------------------------------------|
//! | [`BoundId::CorHyb`]       | `π_o − λ·(1 − p(S))·E[C|S̄]`          |
//! | [`BoundId::LambdaPSR`]    | `π_o − λ·p(S)·R`                     |
//! | [`BoundId::LambdaOver1PlusLambda`] | `π_o − λ/(1+λ)·R`           |
//! | [`BoundId::ThreeNode`]    | `π_o − (2+λ−2√(1+λ))/λ·R` (3 nodes)  |
//!
//! The fan bound lives in [`crate::fan`].

use std::fmt;

use num::traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{self, Agent, AgentKind, Evaluator};
use crate::error::{Error, Result};
use crate::generate;
use crate::graph::{CostModel, GraphBuilder, TaskGraph, TieBreak};
use crate::oracle;
use crate::scalar::{self, Scalar};

/// Default tolerance for rational square-root enclosures.
pub fn default_precision() -> Scalar {
    scalar::ratio(1, 1_000_000_000_000)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffDecomposition {
    pub p_success: Scalar,
    pub exp_cost_success: Scalar,
    /// Defined as 0 when the optimal agent never fails.
    pub exp_cost_failure: Scalar,
    pub payoff: Scalar,
}

impl PayoffDecomposition {
    /// `(1 − p(S))·E[C|S̄]`.
    pub fn failure_mass(&self) -> Scalar {
        (scalar::one() - &self.p_success) * &self.exp_cost_failure
    }

    /// The right-hand side of the decomposition identity.
    pub fn reassemble(&self, reward: &Scalar) -> Scalar {
        &self.p_success * reward - &self.p_success * &self.exp_cost_success - self.failure_mass()
    }
}

/// Decomposition by dynamic programming over the optimal policy, splitting
/// the expected cost by whether the walk ends at the target.
pub fn decompose_optimal(graph: &TaskGraph) -> Result<PayoffDecomposition> {
    let ev = Evaluator::new(graph, &Agent::optimal())?;
    let adj = ev.adjacency();
    let n = adj.len();
    let mut reach = vec![scalar::zero(); n];
    let mut cost_success = vec![scalar::zero(); n];
    let mut cost_failure = vec![scalar::zero(); n];
    for &v in adj.topo_order().iter().rev() {
        if v == adj.target {
            reach[v] = scalar::one();
            continue;
        }
        if adj.sink[v] || !ev.optimal_value(v).continues {
            continue;
        }
        let (mut r, mut a, mut b) = (scalar::zero(), scalar::zero(), scalar::zero());
        for arc in &adj.out[v] {
            let step = &adj.cost[v] + &arc.cost;
            r += &arc.prob * &reach[arc.to];
            a += &arc.prob * (&cost_success[arc.to] + &step * &reach[arc.to]);
            b += &arc.prob * (&cost_failure[arc.to] + &step * (scalar::one() - &reach[arc.to]));
        }
        reach[v] = r;
        cost_success[v] = a;
        cost_failure[v] = b;
    }
    let s = adj.start;
    let p = reach[s].clone();
    let q = scalar::one() - &p;
    Ok(PayoffDecomposition {
        exp_cost_success: if p.is_zero() { scalar::zero() } else { &cost_success[s] / &p },
        exp_cost_failure: if q.is_zero() { scalar::zero() } else { &cost_failure[s] / &q },
        p_success: p,
        payoff: ev.optimal_value(s).value.clone(),
    })
}

/// The same decomposition computed from explicit path enumeration.
pub fn decompose_by_enumeration(graph: &TaskGraph) -> Result<PayoffDecomposition> {
    let outcomes = oracle::enumerate_outcomes(graph, &Agent::optimal())?;
    let (p_success, exp_cost_success, exp_cost_failure) = oracle::split_by_success(&outcomes);
    Ok(PayoffDecomposition {
        p_success,
        exp_cost_success,
        exp_cost_failure,
        payoff: oracle::outcome_payoff(&outcomes, &graph.reward),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    CorHyb,
    LambdaPSR,
    LambdaOver1PlusLambda,
    ThreeNode,
    FanBound,
    /// `π_o ≥ π_s`.
    OptimalAboveSophisticated,
    /// `π_s ≥ π_h`.
    SophisticatedAboveHybrid,
}

impl BoundId {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::CorHyb => "cor_hyb",
            BoundId::LambdaPSR => "lambda_ps_r",
            BoundId::LambdaOver1PlusLambda => "lambda_over_1_plus_lambda",
            BoundId::ThreeNode => "three_node",
            BoundId::FanBound => "fan_bound",
            BoundId::OptimalAboveSophisticated => "optimal_above_sophisticated",
            BoundId::SophisticatedAboveHybrid => "sophisticated_above_hybrid",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality `lhs ≥ rhs` instantiated on one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub bound: BoundId,
    pub graph_ref: String,
    pub lambda: Scalar,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub holds: bool,
}

pub const BOUND_CSV_HEADER: &str = "bound_id,graph_ref,lambda,lhs,rhs,holds";

impl BoundReport {
    pub fn new(bound: BoundId, lambda: &Scalar, lhs: Scalar, rhs: Scalar) -> BoundReport {
        BoundReport {
            bound,
            graph_ref: String::new(),
            lambda: lambda.clone(),
            holds: lhs >= rhs,
            lhs,
            rhs,
        }
    }

    pub fn with_ref(mut self, graph_ref: impl Into<String>) -> BoundReport {
        self.graph_ref = graph_ref.into();
        self
    }

    /// `lhs − rhs`; non-negative iff the bound holds.
    pub fn slack(&self) -> Scalar {
        &self.lhs - &self.rhs
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.bound, self.graph_ref, self.lambda, self.lhs, self.rhs, self.holds
        )
    }
}

fn check_lambda(lambda: &Scalar) -> Result<()> {
    if lambda.is_negative() {
        return Err(Error::Param(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

fn sophisticated_payoff(graph: &TaskGraph, lambda: &Scalar) -> Result<Scalar> {
    Ok(agents::eval_sophisticated(graph, lambda, TieBreak::ContinueOnTie)?.payoff)
}

pub fn check_cor_hyb(graph: &TaskGraph, lambda: &Scalar) -> Result<BoundReport> {
    check_lambda(lambda)?;
    let d = decompose_optimal(graph)?;
    let rhs = &d.payoff - lambda * d.failure_mass();
    Ok(BoundReport::new(BoundId::CorHyb, lambda, sophisticated_payoff(graph, lambda)?, rhs))
}

pub fn check_lambda_ps_r(graph: &TaskGraph, lambda: &Scalar) -> Result<BoundReport> {
    check_lambda(lambda)?;
    let d = decompose_optimal(graph)?;
    let rhs = &d.payoff - lambda * &d.p_success * &graph.reward;
    Ok(BoundReport::new(BoundId::LambdaPSR, lambda, sophisticated_payoff(graph, lambda)?, rhs))
}

pub fn check_closed_form(graph: &TaskGraph, lambda: &Scalar) -> Result<BoundReport> {
    check_lambda(lambda)?;
    let pi_o = agents::eval_optimal(graph)?.payoff;
    let rhs = pi_o - lambda / (scalar::one() + lambda) * &graph.reward;
    Ok(BoundReport::new(
        BoundId::LambdaOver1PlusLambda,
        lambda,
        sophisticated_payoff(graph, lambda)?,
        rhs,
    ))
}

/// All general bounds plus the ordering `π_o ≥ π_s ≥ π_h`, sharing one
/// evaluation per agent.
pub fn general_reports(graph: &TaskGraph, lambda: &Scalar) -> Result<Vec<BoundReport>> {
    check_lambda(lambda)?;
    let d = decompose_optimal(graph)?;
    let pi_s = sophisticated_payoff(graph, lambda)?;
    let pi_h = agents::eval_hybrid(graph, lambda, TieBreak::ContinueOnTie)?.payoff;
    let r = &graph.reward;
    Ok(vec![
        BoundReport::new(BoundId::CorHyb, lambda, pi_s.clone(), &d.payoff - lambda * d.failure_mass()),
        BoundReport::new(BoundId::LambdaPSR, lambda, pi_s.clone(), &d.payoff - lambda * &d.p_success * r),
        BoundReport::new(
            BoundId::LambdaOver1PlusLambda,
            lambda,
            pi_s.clone(),
            &d.payoff - lambda / (scalar::one() + lambda) * r,
        ),
        BoundReport::new(BoundId::OptimalAboveSophisticated, lambda, d.payoff.clone(), pi_s.clone()),
        BoundReport::new(BoundId::SophisticatedAboveHybrid, lambda, pi_s, pi_h),
    ])
}

/// Enclosure `(lo, hi)` of `(2 + λ − 2√(1+λ))/λ` with width at most
/// `2·tol/λ`.
pub fn three_node_coefficient(lambda: &Scalar, tol: &Scalar) -> Result<(Scalar, Scalar)> {
    if !lambda.is_positive() {
        return Err(Error::Param(format!("lambda must be > 0, got {lambda}")));
    }
    let (s_lo, s_hi) = scalar::sqrt_bounds(&(scalar::one() + lambda), tol);
    let two = scalar::int(2);
    let base = &two + lambda;
    Ok(((&base - &two * s_hi) / lambda, (&base - &two * s_lo) / lambda))
}

/// The tight three-node instance: `s` (cost `C`) goes to `t` with
/// probability `p` and to `v` (cost `R + λC`) otherwise; `v` goes to `t`.
///
/// `C = (R/λ)(√(1+λ) − 1)` is rounded to a rational within `precision`, then
/// `p = C(1+λ)/(R + λC)` is computed exactly from the rounded `C`. This keeps
/// the sophisticated agent exactly indifferent at `s` and at `v` while the
/// optimal agent strictly prefers to stop at `v`.
pub fn build_three_node_tight(lambda: &Scalar, reward: &Scalar, precision: &Scalar) -> Result<TaskGraph> {
    if !lambda.is_positive() {
        return Err(Error::Param(format!("lambda must be > 0, got {lambda}")));
    }
    if !precision.is_positive() {
        return Err(Error::Param("precision must be > 0".into()));
    }
    if !reward.is_positive() {
        return Err(Error::Param("reward must be > 0".into()));
    }
    let one = scalar::one();
    let r_scale = if reward > &one { reward.clone() } else { one.clone() };
    let sqrt_tol = precision * lambda / (&r_scale * (&one + lambda));
    let root = scalar::sqrt_approx(&(&one + lambda), &sqrt_tol);
    let c = reward / lambda * (root - &one);
    let stuck = reward + lambda * &c;
    let p = &c * (&one + lambda) / &stuck;
    Ok(GraphBuilder::new(CostModel::NodeCosts)
        .node("s", c)
        .node("v", stuck)
        .node("t", scalar::zero())
        .edge("s", "t", p.clone())
        .edge("s", "v", one - p)
        .edge("v", "t", scalar::one())
        .build("s", "t", reward.clone()))
}

/// `π_s ≥ π_o − (2+λ−2√(1+λ))/λ·R` on a three-node graph. The right-hand
/// side uses the upper end of the coefficient enclosure, so it never
/// overstates the bound by more than `2·precision/λ·R`.
pub fn check_three_node_bound(graph: &TaskGraph, lambda: &Scalar, precision: &Scalar) -> Result<BoundReport> {
    if graph.node_count() != 3 {
        return Err(Error::Param(format!(
            "three-node bound needs exactly 3 nodes, graph has {}",
            graph.node_count()
        )));
    }
    if graph.cost_model != CostModel::NodeCosts {
        return Err(Error::Param("three-node bound applies to the node cost model".into()));
    }
    let (_, coef_hi) = three_node_coefficient(lambda, precision)?;
    let pi_o = agents::eval_optimal(graph)?.payoff;
    let rhs = pi_o - coef_hi * &graph.reward;
    Ok(BoundReport::new(BoundId::ThreeNode, lambda, sophisticated_payoff(graph, lambda)?, rhs))
}

/// Whether `λ/(1+λ)` strictly exceeds the three-node coefficient, decided
/// with a rational enclosure at `precision`.
pub fn closed_form_exceeds_three_node(lambda: &Scalar, precision: &Scalar) -> Result<bool> {
    let (_, coef_hi) = three_node_coefficient(lambda, precision)?;
    Ok(lambda / (scalar::one() + lambda) > coef_hi)
}

/// Edge-cost instance with `R = 1`: `s→v` (prob `ε`, cost `1/((1+λ)ε)`),
/// `s→t` (prob `1−ε`, cost 0), `v→t` (prob 1, cost `1 + λ/((1+λ)ε)`).
pub fn build_edge_cost_tight(lambda: &Scalar, epsilon: &Scalar) -> Result<TaskGraph> {
    if !lambda.is_positive() {
        return Err(Error::Param(format!("lambda must be > 0, got {lambda}")));
    }
    let one = scalar::one();
    if !epsilon.is_positive() || epsilon >= &one {
        return Err(Error::Param(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let scaled = (&one + lambda) * epsilon;
    Ok(GraphBuilder::new(CostModel::EdgeCosts)
        .node("s", scalar::zero())
        .node("v", scalar::zero())
        .node("t", scalar::zero())
        .costly_edge("s", "v", epsilon.clone(), &one / &scaled)
        .costly_edge("s", "t", &one - epsilon, scalar::zero())
        .costly_edge("v", "t", one.clone(), &one + lambda / &scaled)
        .build("s", "t", one))
}

/// Random three-node graph with `R = 1`: `s → {t, v}`, `v → t`, and
/// occasionally `v` as a dead end.
pub fn random_three_node(rng: &mut ChaCha8Rng) -> TaskGraph {
    let p = generate::unit_rational(rng, 20);
    let c_s = generate::unit_rational(rng, 20);
    let c_v = generate::unit_rational(rng, 20) * scalar::int(3);
    let one = scalar::one();
    let b = GraphBuilder::new(CostModel::NodeCosts).node("s", c_s);
    let b = if rng.gen_bool(0.15) {
        b.sink("v")
    } else {
        b.node("v", c_v).edge("v", "t", one.clone())
    };
    b.node("t", scalar::zero())
        .edge("s", "t", p.clone())
        .edge("s", "v", &one - p)
        .build("s", "t", one)
}

/// Convenience used by sweeps: `(π_o, π_s, π_h)` with continue-on-tie.
pub fn payoff_triple(graph: &TaskGraph, lambda: &Scalar) -> Result<(Scalar, Scalar, Scalar)> {
    let o = agents::eval_optimal(graph)?.payoff;
    let s = sophisticated_payoff(graph, lambda)?;
    let h = agents::evaluate(graph, &Agent::new(AgentKind::Hybrid, lambda.clone(), TieBreak::ContinueOnTie)?)?.payoff;
    Ok((o, s, h))
}

/// True when `x` is within `tol` of `y`.
pub fn within(x: &Scalar, y: &Scalar, tol: &Scalar) -> bool {
    (x - y).abs() <= *tol
}
