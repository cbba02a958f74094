//! Fan graphs: a path `v1 → v2 → … → vn → t` where every `v_i` with `i < n`
//! also jumps straight to `t`.
//!
//! `probs[i]` is the probability that `v_{i+1}` jumps to the target, so the
//! walk fails only along the path itself and the optimal agent's failure
//! mass is `∏(1 − p_i)·Σc_i` up to its stopping node.

use num::traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{self, Agent, Evaluator};
use crate::bounds::{BoundId, BoundReport};
use crate::error::{Error, Result};
use crate::generate;
use crate::graph::{CostModel, GraphBuilder, TaskGraph, TieBreak};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanSpec {
    /// `p_1..p_{n-1}`: probability of jumping from `v_i` to the target.
    pub probs: Vec<Scalar>,
    /// `c_1..c_n`.
    pub costs: Vec<Scalar>,
    pub reward: Scalar,
}

impl FanSpec {
    pub fn n(&self) -> usize {
        self.costs.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Param(format!("a fan needs at least 2 path nodes, got {n}")));
        }
        if self.probs.len() != n - 1 {
            return Err(Error::Param(format!(
                "a fan with {n} path nodes needs {} probabilities, got {}",
                n - 1,
                self.probs.len()
            )));
        }
        let one = scalar::one();
        if let Some((i, p)) = self.probs.iter().enumerate().find(|(_, p)| p.is_negative() || *p > &one) {
            return Err(Error::Param(format!("p_{} = {p} lies outside [0, 1]", i + 1)));
        }
        if let Some((i, c)) = self.costs.iter().enumerate().find(|(_, c)| c.is_negative()) {
            return Err(Error::Param(format!("c_{} = {c} is negative", i + 1)));
        }
        if self.reward.is_negative() {
            return Err(Error::Param("reward must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn path_id(i: usize) -> String {
    format!("v{i}")
}

pub fn build_fan(spec: &FanSpec) -> Result<TaskGraph> {
    spec.check()?;
    let n = spec.n();
    let mut b = GraphBuilder::new(CostModel::NodeCosts);
    for (i, c) in spec.costs.iter().enumerate() {
        b = b.node(&path_id(i + 1), c.clone());
    }
    b = b.node("t", scalar::zero());
    for (i, p) in spec.probs.iter().enumerate() {
        b = b
            .edge(&path_id(i + 1), "t", p.clone())
            .edge(&path_id(i + 1), &path_id(i + 2), scalar::one() - p);
    }
    b = b.edge(&path_id(n), "t", scalar::one());
    Ok(b.build(&path_id(1), "t", spec.reward.clone()))
}

fn tight_q(n: usize) -> Scalar {
    scalar::one() - scalar::ratio(1, n as i64)
}

/// `λ_n = (1 − q^{n−1}) / (n·q^{n+1})` with `q = 1 − 1/n`.
pub fn tight_fan_lambda(n: usize) -> Result<Scalar> {
    if n < 3 {
        return Err(Error::Param(format!("tight fan needs n >= 3, got {n}")));
    }
    let q = tight_q(n);
    let e = n as u32;
    Ok((scalar::one() - scalar::pow(&q, e - 1)) / (scalar::int(n as i64) * scalar::pow(&q, e + 1)))
}

/// Path cost `c = 1/n − 1/n²` of the tight family.
pub fn tight_fan_step_cost(n: usize) -> Scalar {
    scalar::ratio(1, n as i64) - scalar::ratio(1, (n * n) as i64)
}

/// The tight family with `R = 1`, `p_i = 1/n`, `c_i = 1/n − 1/n²` for
/// `i < n`, and `c_n = R + λ_n·c·(n−1)`, which leaves the sophisticated agent
/// exactly indifferent at `v_n` and makes the optimal agent stop there.
pub fn build_tight_fan(n: usize) -> Result<(FanSpec, Scalar)> {
    let lambda = tight_fan_lambda(n)?;
    Ok((tight_fan_with(n, &lambda)?, lambda))
}

/// The tight-family shape with the last cost set for an arbitrary bias.
pub fn tight_fan_with(n: usize, lambda: &Scalar) -> Result<FanSpec> {
    if n < 3 {
        return Err(Error::Param(format!("tight fan needs n >= 3, got {n}")));
    }
    let c = tight_fan_step_cost(n);
    let p = scalar::ratio(1, n as i64);
    let last = scalar::one() + lambda * &c * scalar::int(n as i64 - 1);
    let mut costs = vec![c; n - 1];
    costs.push(last);
    Ok(FanSpec {
        probs: vec![p; n - 1],
        costs,
        reward: scalar::one(),
    })
}

/// `(1−1/n)^{n−1}·(n−1)·c` for the tight family; the optimal payoff equals
/// `λ_n` times this.
pub fn tight_fan_failure_mass(n: usize) -> Scalar {
    let q = tight_q(n);
    scalar::pow(&q, n as u32 - 1) * scalar::int(n as i64 - 1) * tight_fan_step_cost(n)
}

/// `λ·(1−1/n)^n·R`.
pub fn fan_bound_rhs(n: usize, lambda: &Scalar, reward: &Scalar) -> Scalar {
    lambda * scalar::pow(&tight_q(n.max(1)), n as u32) * reward
}

pub fn check_fan_bound(spec: &FanSpec, lambda: &Scalar) -> Result<BoundReport> {
    if lambda.is_negative() {
        return Err(Error::Param(format!("lambda must be >= 0, got {lambda}")));
    }
    let g = build_fan(spec)?;
    let pi_o = agents::eval_optimal(&g)?.payoff;
    let pi_s = agents::eval_sophisticated(&g, lambda, TieBreak::ContinueOnTie)?.payoff;
    let rhs = pi_o - fan_bound_rhs(spec.n(), lambda, &spec.reward);
    Ok(BoundReport::new(BoundId::FanBound, lambda, pi_s, rhs))
}

/// 1-based index of the path node where the optimal agent stops, or `None`
/// when it continues everywhere and every walk ends at the target.
pub fn optimal_stop_index(spec: &FanSpec) -> Result<Option<usize>> {
    let g = build_fan(spec)?;
    let ev = Evaluator::new(&g, &Agent::optimal())?;
    Ok((1..=spec.n()).find(|&k| {
        let idx = ev.node_index(&path_id(k)).expect("path node exists");
        !ev.optimal_value(idx).continues
    }))
}

/// `(Σ_{i<k} c_i, Σ_{i<k} p_i·R)` where `v_k` is the node the optimal agent
/// stops at; both sums are empty when it never stops.
pub fn fan_cost_sums(spec: &FanSpec) -> Result<(Scalar, Scalar)> {
    let k = optimal_stop_index(spec)?.unwrap_or(1);
    let costs: Scalar = spec.costs[..k - 1].iter().sum();
    let probs: Scalar = spec.probs[..k - 1].iter().sum();
    Ok((costs, probs * &spec.reward))
}

/// `Σ_{i<k} c_i ≤ Σ_{i<k} p_i·R` (see [`fan_cost_sums`]).
pub fn check_fan_cost_bound(spec: &FanSpec) -> Result<bool> {
    let (costs, gain) = fan_cost_sums(spec)?;
    Ok(costs <= gain)
}

/// `∏(1 − p_i)·Σp_i`.
pub fn failure_product(probs: &[Scalar]) -> Scalar {
    let survive: Scalar = probs.iter().map(|p| scalar::one() - p).product();
    survive * probs.iter().sum::<Scalar>()
}

fn failure_product_f64(cells: &[usize], m: usize) -> f64 {
    let mut survive = 1.0;
    let mut sum = 0.0;
    for &c in cells {
        let p = c as f64 / m as f64;
        survive *= 1.0 - p;
        sum += p;
    }
    survive * sum
}

pub const MAX_OPTIMIZER_K: usize = 6;
const COARSE_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub k: usize,
    /// Grid cells per unit.
    pub resolution: usize,
    pub argmax: Vec<Scalar>,
    pub value: Scalar,
}

impl GridOptimum {
    /// Largest coordinate distance from `1/k`, in grid cells.
    pub fn cells_from_uniform(&self) -> Scalar {
        let target = scalar::ratio(1, self.k as i64);
        self.argmax
            .iter()
            .map(|p| (p - &target).abs() * scalar::int(self.resolution as i64))
            .max()
            .unwrap_or_else(scalar::zero)
    }
}

fn multisets(d: usize, m: usize) -> u128 {
    // C(m + d, d)
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc * (m as u128 + i) / i;
    }
    acc
}

fn best_sorted(d: usize, m: usize, step: usize, prefix: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
    if prefix.len() == d {
        let v = failure_product_f64(prefix, m);
        if v > best.0 {
            *best = (v, prefix.clone());
        }
        return;
    }
    let from = prefix.last().copied().unwrap_or(0);
    let mut c = from;
    while c <= m {
        prefix.push(c);
        best_sorted(d, m, step, prefix, best);
        prefix.pop();
        c += step;
    }
}

fn best_in_box(centre: &[usize], radius: usize, m: usize) -> (f64, Vec<usize>) {
    let d = centre.len();
    let lo: Vec<usize> = centre.iter().map(|&c| c.saturating_sub(radius)).collect();
    let hi: Vec<usize> = centre.iter().map(|&c| (c + radius).min(m)).collect();
    let mut cur = lo.clone();
    let mut best = (failure_product_f64(centre, m), centre.to_vec());
    loop {
        let v = failure_product_f64(&cur, m);
        if v > best.0 {
            best = (v, cur.clone());
        }
        let mut i = 0;
        loop {
            if i == d {
                return best;
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Grid search for the maximum of `∏(1−p_i)·Σp_i` over `[0,1]^{k−1}` on the
/// grid `{0, 1/m, …, 1}`.
///
/// A coarse pass over sorted tuples (the function is symmetric) picks the
/// largest divisor of `m` that fits the search budget; boxes of fine cells
/// around the incumbent are then searched until it stops moving.
pub fn maximize_failure_product(k: usize, resolution: usize) -> Result<GridOptimum> {
    if !(2..=MAX_OPTIMIZER_K).contains(&k) {
        return Err(Error::Guard(format!("optimizer supports 2 <= k <= {MAX_OPTIMIZER_K}, got {k}")));
    }
    if resolution < 2 {
        return Err(Error::Param("grid resolution must be at least 2 cells".into()));
    }
    let d = k - 1;
    let m = resolution;
    let coarse = (1..=m)
        .rev()
        .filter(|&c| m.is_multiple_of(c))
        .find(|&c| multisets(d, c) <= COARSE_BUDGET)
        .unwrap_or(1);
    let step = m / coarse;
    let mut best = (f64::MIN, Vec::new());
    best_sorted(d, m, step, &mut Vec::with_capacity(d), &mut best);
    let radius = step.max(1);
    loop {
        let next = best_in_box(&best.1, radius, m);
        if next.1 == best.1 {
            break;
        }
        best = next;
    }
    let argmax: Vec<Scalar> = best.1.iter().map(|&c| scalar::ratio(c as i64, m as i64)).collect();
    Ok(GridOptimum {
        k,
        resolution: m,
        value: failure_product(&argmax),
        argmax,
    })
}

/// Sophisticated decision at `v_k` with sunk cost `c·(k−1)` in the tight fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuationRow {
    pub k: usize,
    /// `π_s(v_k)`: the sophisticated continuation value.
    pub value: Scalar,
    /// `−λ·c·(k−1)`.
    pub threshold: Scalar,
    pub holds: bool,
    pub tied: bool,
}

pub fn check_continuation_lemma(n: usize) -> Result<Vec<ContinuationRow>> {
    let (_, lambda) = build_tight_fan(n)?;
    check_continuation_lemma_with(n, &lambda)
}

/// The continuation lemma on [`tight_fan_with`]`(n, lambda)`, i.e. with an
/// arbitrary bias in place of `λ_n`.
pub fn check_continuation_lemma_with(n: usize, lambda: &Scalar) -> Result<Vec<ContinuationRow>> {
    let spec = tight_fan_with(n, lambda)?;
    let g = build_fan(&spec)?;
    let mut ev = Evaluator::new(&g, &Agent::sophisticated(lambda.clone()))?;
    let c = tight_fan_step_cost(n);
    (1..=n)
        .map(|k| {
            let sunk = &c * scalar::int(k as i64 - 1);
            let state = ev.state(&path_id(k), &sunk)?;
            let value = state.compared.expect("path nodes are not terminal");
            let threshold = -(lambda * sunk);
            Ok(ContinuationRow {
                k,
                holds: value >= threshold,
                tied: value == threshold,
                value,
                threshold,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub n: usize,
    pub p: Scalar,
    /// `(1−p)^{n−1}·(n−1)`.
    pub bound: Scalar,
    /// `f(1)` and `f(n)` both equal the bound exactly.
    pub endpoints_equal: bool,
    /// Exact `f(x)` at `x = 1..=n`.
    pub integer_values: Vec<Scalar>,
    pub integers_below: bool,
    /// Midpoint convexity and the upper bound held at every sampled point.
    pub samples_ok: bool,
    pub samples: usize,
}

impl ConvexityReport {
    pub fn holds(&self) -> bool {
        self.endpoints_equal && self.integers_below && self.samples_ok
    }
}

/// `f(x) = (1−p)^{n−x}(n−1) − (x−1) + (1−p)^{n−1}(x−1)` at integer `x`.
pub fn convexity_f(n: usize, p: &Scalar, x: usize) -> Scalar {
    let q = scalar::one() - p;
    let nm1 = scalar::int(n as i64 - 1);
    let xm1 = scalar::int(x as i64 - 1);
    scalar::pow(&q, (n - x) as u32) * &nm1 - &xm1 + scalar::pow(&q, n as u32 - 1) * xm1
}

fn convexity_f64(n: usize, q: f64, x: f64) -> f64 {
    let n = n as f64;
    q.powf(n - x) * (n - 1.0) - (x - 1.0) + q.powf(n - 1.0) * (x - 1.0)
}

/// Exact values at integer points plus a floating-point sweep over
/// `samples` evenly spaced real points checking `f(x) ≤ bound` and
/// `f(x) ≤ (f(x−h) + f(x+h))/2`.
pub fn check_convexity(n: usize, p: &Scalar, samples: usize) -> Result<ConvexityReport> {
    if n < 2 {
        return Err(Error::Param(format!("n must be >= 2, got {n}")));
    }
    if !p.is_positive() || p >= &scalar::one() {
        return Err(Error::Param(format!("p must lie in (0, 1), got {p}")));
    }
    let integer_values: Vec<Scalar> = (1..=n).map(|x| convexity_f(n, p, x)).collect();
    let bound = scalar::pow(&(scalar::one() - p), n as u32 - 1) * scalar::int(n as i64 - 1);
    let endpoints_equal = integer_values[0] == bound && integer_values[n - 1] == bound;
    let integers_below = integer_values.iter().all(|v| v <= &bound);

    let q = 1.0 - scalar::to_f64(p);
    let bound_f = scalar::to_f64(&bound);
    let tol = 1e-12 * (1.0 + bound_f.abs());
    let span = (n - 1) as f64;
    let h = span / (2.0 * samples.max(1) as f64);
    let samples_ok = (0..samples).all(|i| {
        let x = 1.0 + span * (i as f64 + 0.5) / samples as f64;
        let fx = convexity_f64(n, q, x);
        let mid = 0.5 * (convexity_f64(n, q, x - h) + convexity_f64(n, q, x + h));
        fx <= bound_f + tol && fx <= mid + tol
    });
    Ok(ConvexityReport {
        n,
        p: p.clone(),
        bound,
        endpoints_equal,
        integer_values,
        integers_below,
        samples_ok,
        samples,
    })
}

/// `g(n) = (1−1/n)^{n−1} + n·(1−1/n)^{n+1}`; `λ_n < 1` iff `g(n) > 1`.
pub fn lambda_gap_function(n: usize) -> Scalar {
    let q = tight_q(n);
    let e = n as u32;
    scalar::pow(&q, e - 1) + scalar::int(n as i64) * scalar::pow(&q, e + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneReport {
    pub lo: usize,
    pub hi: usize,
    pub increasing: bool,
    pub at_least_one: bool,
    /// First `n` where `g(n+1) ≤ g(n)`, if any.
    pub first_failure: Option<usize>,
}

pub fn check_lambda_increasing(lo: usize, hi: usize) -> Result<MonotoneReport> {
    if lo < 3 || hi > 10_000 || lo > hi {
        return Err(Error::Param(format!("range must lie within [3, 10000], got [{lo}, {hi}]")));
    }
    let one = scalar::one();
    let mut prev = lambda_gap_function(lo);
    let mut at_least_one = prev >= one;
    let mut first_failure = None;
    for n in lo + 1..=hi {
        let cur = lambda_gap_function(n);
        at_least_one &= cur >= one;
        if cur <= prev && first_failure.is_none() {
            first_failure = Some(n - 1);
        }
        prev = cur;
    }
    Ok(MonotoneReport {
        lo,
        hi,
        increasing: first_failure.is_none(),
        at_least_one,
        first_failure,
    })
}

/// Random fan with `2..=max_n` path nodes and `R = 1`.
pub fn random_fan(rng: &mut ChaCha8Rng, max_n: usize) -> FanSpec {
    let n = rng.gen_range(2..=max_n.max(2));
    let probs = (0..n - 1).map(|_| generate::unit_rational(rng, 12)).collect();
    let mut costs: Vec<Scalar> = (0..n - 1)
        .map(|_| generate::unit_rational(rng, 12) * scalar::ratio(1, 2))
        .collect();
    costs.push(generate::unit_rational(rng, 12) * scalar::int(2));
    FanSpec {
        probs,
        costs,
        reward: scalar::one(),
    }
}

/// `(π_o, π_s)` of the fan at `lambda`.
pub fn fan_payoffs(spec: &FanSpec, lambda: &Scalar) -> Result<(Scalar, Scalar)> {
    let g = build_fan(spec)?;
    let o = agents::eval_optimal(&g)?.payoff;
    let s = agents::eval_sophisticated(&g, lambda, TieBreak::ContinueOnTie)?.payoff;
    Ok((o, s))
}
