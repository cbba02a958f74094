//! Knapsack solution counting through the sophisticated agent's payoff.
//!
//! The gadget walks `s → layer 1 → … → layer n → q`, picking up weight
//! `w_i` at `u_i` with probability 1/2. From `q` it either jumps to `t` or
//! visits `q′`, whose cost `R + λ(B+C)` the agent only pays when its sunk
//! cost exceeds `C + B`. With `R = 2Σw + 2λB` the agent always reaches `q`
//! and
//!
//! ```text
//! π_s = R/2 − Σw/2 − C − (λ/2)(1 − p)(B + C)
//! ```
//!
//! where `p` is the fraction of feasible subsets.

use num::bigint::BigInt;
use num::traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentEvaluation, Evaluator};
use crate::error::{Error, Result};
use crate::graph::{CostModel, GraphBuilder, TaskGraph, TieBreak};
use crate::scalar::{self, Scalar};

pub const BRUTE_FORCE_LIMIT: usize = 22;
pub const BINARY_SEARCH_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub weights: Vec<u64>,
    pub capacity: u64,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<u64>, capacity: u64) -> KnapsackInstance {
        KnapsackInstance { weights, capacity }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    fn check(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::Param("knapsack instance needs at least one item".into()));
        }
        if self.weights.contains(&0) {
            return Err(Error::Param("knapsack weights must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct KnapsackGadget {
    pub instance: KnapsackInstance,
    pub graph: TaskGraph,
    pub reward: Scalar,
    pub c: Scalar,
    pub lambda: Scalar,
    pub alpha: Option<Scalar>,
}

/// `R = 2Σw + 2λB`.
pub fn gadget_reward(inst: &KnapsackInstance, lambda: &Scalar) -> Scalar {
    scalar::int(2 * inst.total_weight() as i64) + scalar::int(2) * lambda * scalar::int(inst.capacity as i64)
}

pub fn build_gadget(inst: &KnapsackInstance, lambda: &Scalar, c: &Scalar) -> Result<KnapsackGadget> {
    inst.check()?;
    if !lambda.is_positive() {
        return Err(Error::Param(format!("lambda must be > 0, got {lambda}")));
    }
    if c.is_negative() {
        return Err(Error::Param(format!("C must be >= 0, got {c}")));
    }
    let n = inst.n();
    let reward = gadget_reward(inst, lambda);
    let b = scalar::int(inst.capacity as i64);
    let half = scalar::ratio(1, 2);
    let u = |i: usize| format!("u{i}");
    let v = |i: usize| format!("v{i}");

    let mut g = GraphBuilder::new(CostModel::NodeCosts).node("s", c.clone());
    for (i, &w) in inst.weights.iter().enumerate() {
        g = g.node(&u(i + 1), scalar::int(w as i64)).node(&v(i + 1), scalar::zero());
    }
    g = g
        .node("q", scalar::zero())
        .node("qp", &reward + lambda * (&b + c))
        .node("t", scalar::zero())
        .edge("s", &u(1), half.clone())
        .edge("s", &v(1), half.clone());
    for i in 1..n {
        for from in [u(i), v(i)] {
            g = g.edge(&from, &u(i + 1), half.clone()).edge(&from, &v(i + 1), half.clone());
        }
    }
    g = g
        .edge(&u(n), "q", scalar::one())
        .edge(&v(n), "q", scalar::one())
        .edge("q", "qp", half.clone())
        .edge("q", "t", half)
        .edge("qp", "t", scalar::one());
    Ok(KnapsackGadget {
        instance: inst.clone(),
        graph: g.build("s", "t", reward.clone()),
        reward,
        c: c.clone(),
        lambda: lambda.clone(),
        alpha: None,
    })
}

impl KnapsackGadget {
    pub fn agent(&self) -> Agent {
        Agent::sophisticated(self.lambda.clone()).with_tie(TieBreak::StopOnTie)
    }

    /// Sophisticated evaluation under stop-on-tie.
    pub fn evaluate(&self) -> Result<AgentEvaluation> {
        Evaluator::new(&self.graph, &self.agent())?.evaluate()
    }

    /// `R/2 − Σw/2 − C − (λ/2)(1 − count/2ⁿ)(B + C)`.
    pub fn predicted_payoff(&self, count: u64) -> Scalar {
        let p = scalar::ratio(count as i64, 1i64 << self.instance.n());
        let half = scalar::ratio(1, 2);
        let b = scalar::int(self.instance.capacity as i64);
        &half * &self.reward
            - &half * scalar::int(self.instance.total_weight() as i64)
            - &self.c
            - &half * &self.lambda * (scalar::one() - p) * (b + &self.c)
    }

    /// Whether the agent would begin: its expected payoff at `s` is at
    /// least zero. Ties here count as starting.
    pub fn starts(&self) -> Result<bool> {
        Ok(!self.evaluate()?.start_value.is_negative())
    }

    pub fn metadata(&self) -> GadgetMetadata {
        GadgetMetadata {
            weights: self.instance.weights.clone(),
            capacity: self.instance.capacity,
            lambda: self.lambda.to_string(),
            c: self.c.to_string(),
            reward: self.reward.to_string(),
            alpha: self.alpha.as_ref().map(|a| a.to_string()),
        }
    }
}

/// Sidecar record written next to a serialized gadget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetMetadata {
    pub weights: Vec<u64>,
    pub capacity: u64,
    pub lambda: String,
    pub c: String,
    pub reward: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
}

/// `2ⁿ·((2π + Σw − R + 2C)/(λ(B + C)) + 1)`, which must be an integer in
/// `[0, 2ⁿ]`.
pub fn recover_count(pi_s: &Scalar, inst: &KnapsackInstance, lambda: &Scalar, c: &Scalar) -> Result<u64> {
    let b = scalar::int(inst.capacity as i64);
    let denom = lambda * (&b + c);
    if denom.is_zero() {
        return Err(Error::Param("recovering the count needs lambda·(B + C) > 0".into()));
    }
    let r = gadget_reward(inst, lambda);
    let frac = (scalar::int(2) * pi_s + scalar::int(inst.total_weight() as i64) - r + scalar::int(2) * c) / denom
        + scalar::one();
    let scaled = frac * Scalar::from_integer(BigInt::from(1u64) << inst.n());
    let count = scalar::as_integer(&scaled).ok_or_else(|| Error::NonIntegerCount(scaled.to_string()))?;
    let limit = BigInt::from(1u64) << inst.n();
    if count.is_negative() || count > limit {
        return Err(Error::NonIntegerCount(format!("{count} lies outside [0, {limit}]")));
    }
    Ok(count.to_u64().expect("bounded by 2^n"))
}

/// Builds the gadget, evaluates it, and recovers the count.
pub fn count_via_gadget(inst: &KnapsackInstance, lambda: &Scalar, c: &Scalar) -> Result<u64> {
    let gadget = build_gadget(inst, lambda, c)?;
    let eval = gadget.evaluate()?;
    recover_count(&eval.start_value, inst, lambda, c)
}

pub fn count_bruteforce(inst: &KnapsackInstance) -> Result<u64> {
    let n = inst.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Guard(format!(
            "brute force supports at most {BRUTE_FORCE_LIMIT} items, got {n}"
        )));
    }
    Ok((0u64..1 << n)
        .filter(|mask| {
            let total: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| inst.weights[i]).sum();
            total <= inst.capacity
        })
        .count() as u64)
}

/// `C = (R − Σw − λ(1−α)B)/(2 + λ(1−α))`, which puts the payoff at exactly
/// zero when the feasible fraction equals `α`.
pub fn threshold_c(inst: &KnapsackInstance, lambda: &Scalar, alpha: &Scalar) -> Result<Scalar> {
    if !alpha.is_positive() || alpha >= &scalar::one() {
        return Err(Error::Param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let r = gadget_reward(inst, lambda);
    let damp = lambda * (scalar::one() - alpha);
    let b = scalar::int(inst.capacity as i64);
    Ok((r - scalar::int(inst.total_weight() as i64) - &damp * b) / (scalar::int(2) + damp))
}

/// The gadget tuned by [`threshold_c`].
pub fn threshold_gadget(inst: &KnapsackInstance, lambda: &Scalar, alpha: &Scalar) -> Result<KnapsackGadget> {
    let c = threshold_c(inst, lambda, alpha)?;
    let mut gadget = build_gadget(inst, lambda, &c)?;
    gadget.alpha = Some(alpha.clone());
    Ok(gadget)
}

/// Recovers the count from start decisions alone: `count ≥ j` iff the agent
/// starts on the gadget tuned to `α = (j − 1/2)/2ⁿ`.
pub fn binary_search_count(inst: &KnapsackInstance, lambda: &Scalar) -> Result<u64> {
    inst.check()?;
    let n = inst.n();
    if n > BINARY_SEARCH_LIMIT {
        return Err(Error::Guard(format!(
            "binary search supports at most {BINARY_SEARCH_LIMIT} items, got {n}"
        )));
    }
    let (mut lo, mut hi) = (0u64, 1u64 << n);
    while lo < hi {
        let j = lo + (hi - lo).div_ceil(2);
        let alpha = scalar::ratio(2 * j as i64 - 1, 1i64 << (n + 1));
        if threshold_gadget(inst, lambda, &alpha)?.starts()? {
            lo = j;
        } else {
            hi = j - 1;
        }
    }
    Ok(lo)
}

/// Random instance with `1..=max_n` items, weights in `1..=max_weight`, and
/// a capacity anywhere from 1 to the total weight.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_weight: u64) -> KnapsackInstance {
    let n = rng.gen_range(1..=max_n.max(1));
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: u64 = weights.iter().sum();
    let capacity = rng.gen_range(1..=total);
    KnapsackInstance { weights, capacity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn small() -> KnapsackInstance {
        KnapsackInstance::new(vec![1, 2], 2)
    }

    #[test]
    fn gadget_shape() {
        let g = build_gadget(&small(), &ratio(1, 2), &int(0)).unwrap();
        assert!(g.graph.validate().is_ok());
        assert_eq!(g.graph.node_count(), 8);
        assert_eq!(g.reward, int(8));
        assert_eq!(g.graph.node("qp").unwrap().cost, int(9));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(count_bruteforce(&small()).unwrap(), 3);
        assert_eq!(count_bruteforce(&KnapsackInstance::new(vec![], 0)).unwrap(), 1);
        assert_eq!(count_bruteforce(&KnapsackInstance::new(vec![1, 1, 1], 2)).unwrap(), 7);
        assert!(count_bruteforce(&KnapsackInstance::new(vec![1; 23], 2)).is_err());
    }

    #[test]
    fn recovers_small_counts() {
        assert_eq!(count_via_gadget(&small(), &ratio(1, 2), &int(0)).unwrap(), 3);
        assert_eq!(count_via_gadget(&KnapsackInstance::new(vec![5], 1), &int(1), &int(0)).unwrap(), 1);
        assert_eq!(count_via_gadget(&KnapsackInstance::new(vec![1, 2, 3], 6), &int(1), &int(2)).unwrap(), 8);
    }

    #[test]
    fn payoff_matches_closed_form() {
        let g = build_gadget(&small(), &ratio(1, 2), &int(1)).unwrap();
        assert_eq!(g.evaluate().unwrap().start_value, g.predicted_payoff(3));
    }

    #[test]
    fn mismatched_payoff_is_rejected() {
        let err = recover_count(&ratio(1, 7), &small(), &ratio(1, 2), &int(0));
        assert!(matches!(err, Err(Error::NonIntegerCount(_))));
    }

    #[test]
    fn threshold_is_exact() {
        let lambda = ratio(1, 2);
        let at = threshold_gadget(&small(), &lambda, &ratio(3, 4)).unwrap();
        assert_eq!(at.evaluate().unwrap().start_value, int(0));
        assert!(at.starts().unwrap());
        let above = threshold_gadget(&small(), &lambda, &ratio(76, 100)).unwrap();
        assert!(!above.starts().unwrap());
        let below = threshold_gadget(&small(), &lambda, &ratio(74, 100)).unwrap();
        assert!(below.evaluate().unwrap().start_value.is_positive());
    }

    #[test]
    fn binary_search_examples() {
        assert_eq!(binary_search_count(&small(), &ratio(1, 2)).unwrap(), 3);
        assert_eq!(binary_search_count(&KnapsackInstance::new(vec![3, 3, 3], 2), &ratio(1, 2)).unwrap(), 1);
    }

    #[test]
    fn metadata_round_trips() {
        let g = threshold_gadget(&small(), &ratio(1, 2), &ratio(3, 4)).unwrap();
        let text = serde_json::to_string(&g.metadata()).unwrap();
        let back: GadgetMetadata = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g.metadata());
        assert_eq!(back.alpha.as_deref(), Some("3/4"));
    }
}
