//! Property suites behind `verify`.

use std::fmt;
use std::str::FromStr;

use num::traits::{Signed, Zero};

use crate::bounds::{self, BoundReport};
use crate::error::{Error, Result};
use crate::fan;
use crate::generate;
use crate::graph::TaskGraph;
use crate::hardness::{self, KnapsackInstance};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Fan,
    Hardness,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bounds" => Ok(Suite::Bounds),
            "fan" => Ok(Suite::Fan),
            "hardness" => Ok(Suite::Hardness),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?} (bounds, fan, hardness, all)")),
        }
    }
}

pub const CHECK_CSV_HEADER: &str = "check,graph_ref,lambda,lhs,rhs,holds";

/// One verified relation. Inequality checks read `lhs ≥ rhs`; equality and
/// tolerance checks carry their own verdict in `holds`.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check: String,
    pub graph_ref: String,
    pub lambda: Option<Scalar>,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub holds: bool,
    pub counterexample: Option<TaskGraph>,
}

impl CheckRow {
    fn new(check: &str, graph_ref: impl Into<String>, lhs: Scalar, rhs: Scalar, holds: bool) -> CheckRow {
        CheckRow {
            check: check.to_string(),
            graph_ref: graph_ref.into(),
            lambda: None,
            lhs,
            rhs,
            holds,
            counterexample: None,
        }
    }

    fn at(mut self, lambda: &Scalar) -> CheckRow {
        self.lambda = Some(lambda.clone());
        self
    }

    fn on(mut self, graph: &TaskGraph) -> CheckRow {
        if !self.holds {
            self.counterexample = Some(graph.clone());
        }
        self
    }

    fn from_bound(report: BoundReport, graph_ref: &str, graph: &TaskGraph) -> CheckRow {
        CheckRow {
            check: report.bound.to_string(),
            graph_ref: graph_ref.to_string(),
            lambda: Some(report.lambda),
            holds: report.holds,
            lhs: report.lhs,
            rhs: report.rhs,
            counterexample: None,
        }
        .on(graph)
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lambda = self.lambda.as_ref().map(|l| l.to_string()).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{}",
            self.check, self.graph_ref, lambda, self.lhs, self.rhs, self.holds
        )
    }
}

fn lambda_grid() -> Vec<Scalar> {
    vec![scalar::ratio(1, 4), scalar::ratio(1, 2), scalar::one(), scalar::int(2)]
}

fn three_node_grid() -> Vec<Scalar> {
    vec![
        scalar::ratio(1, 4),
        scalar::ratio(1, 2),
        scalar::one(),
        scalar::int(2),
        scalar::int(10),
    ]
}

pub fn run_suite(suite: Suite, seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Bounds => bounds_suite(seed, count),
        Suite::Fan => fan_suite(seed, count),
        Suite::Hardness => hardness_suite(seed, count),
        Suite::All => {
            let mut rows = bounds_suite(seed, count)?;
            rows.extend(fan_suite(seed, count)?);
            rows.extend(hardness_suite(seed, count)?);
            Ok(rows)
        }
    }
}

/// General bounds and the decomposition identity on random DAGs, the
/// three-node bound on random three-node graphs, and the tight
/// constructions.
pub fn bounds_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = generate::rng(seed);
    for i in 0..count {
        let g = generate::random_graph(&mut rng, 10);
        let name = format!("random-{seed}-{i}");
        let d = bounds::decompose_optimal(&g)?;
        let reassembled = d.reassemble(&g.reward);
        let holds = reassembled == d.payoff;
        rows.push(CheckRow::new("decomposition", &name, reassembled, d.payoff.clone(), holds).on(&g));
        for lambda in lambda_grid() {
            for report in bounds::general_reports(&g, &lambda)? {
                rows.push(CheckRow::from_bound(report, &name, &g));
            }
        }
    }
    for i in 0..count {
        let g = bounds::random_three_node(&mut rng);
        let name = format!("three-node-{seed}-{i}");
        for lambda in three_node_grid() {
            let report = bounds::check_three_node_bound(&g, &lambda, &bounds::default_precision())?;
            rows.push(CheckRow::from_bound(report, &name, &g));
        }
    }
    rows.extend(three_node_tight_rows()?);
    let lambda = scalar::ratio(1, 2);
    let eps = scalar::ratio(1, 100);
    let g = bounds::build_edge_cost_tight(&lambda, &eps)?;
    let (pi_o, pi_s, _) = bounds::payoff_triple(&g, &lambda)?;
    let expected = scalar::ratio(1, 3) - &eps;
    let holds = pi_o == expected && pi_s.is_zero();
    rows.push(CheckRow::new("edge_cost_tight", "edge-cost-tight", pi_o, expected, holds).at(&lambda).on(&g));
    Ok(rows)
}

/// `|π_s| ≤ 10⁻¹⁰` and `|(π_o − π_s) − coefficient·R| ≤ 10⁻⁹` on the tight
/// three-node instances, plus the ordering of the two closed forms.
pub fn three_node_tight_rows() -> Result<Vec<CheckRow>> {
    let precision = bounds::default_precision();
    let mut rows = Vec::new();
    for lambda in three_node_grid() {
        let g = bounds::build_three_node_tight(&lambda, &scalar::one(), &precision)?;
        let (pi_o, pi_s, _) = bounds::payoff_triple(&g, &lambda)?;
        let (lo, hi) = bounds::three_node_coefficient(&lambda, &precision)?;
        let coef = (lo + hi) / scalar::int(2);
        let gap = &pi_o - &pi_s;
        let holds = pi_s.abs() <= scalar::ratio(1, 10_000_000_000)
            && bounds::within(&gap, &coef, &scalar::ratio(1, 1_000_000_000));
        let name = format!("three-node-tight-{lambda}");
        rows.push(CheckRow::new("three_node_tight_gap", &name, gap, coef, holds).at(&lambda).on(&g));
        let (_, coef_hi) = bounds::three_node_coefficient(&lambda, &precision)?;
        let closed = &lambda / (scalar::one() + &lambda);
        let holds = closed > coef_hi;
        rows.push(CheckRow::new("closed_form_above_three_node", "", closed, coef_hi, holds).at(&lambda));
    }
    Ok(rows)
}

/// The fan bound and cost lemma on random fans, the tight family, the
/// continuation lemma, the optimizer claim, convexity and the monotone
/// gap function.
pub fn fan_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = generate::rng(seed.wrapping_add(1));
    for i in 0..count {
        let spec = fan::random_fan(&mut rng, 12);
        let g = fan::build_fan(&spec)?;
        let name = format!("fan-{seed}-{i}");
        for lambda in [scalar::ratio(1, 4), scalar::ratio(1, 2), scalar::one()] {
            rows.push(CheckRow::from_bound(fan::check_fan_bound(&spec, &lambda)?, &name, &g));
        }
        let (costs, gain) = fan::fan_cost_sums(&spec)?;
        let holds = gain >= costs;
        rows.push(CheckRow::new("fan_cost_lemma", &name, gain, costs, holds).on(&g));
    }
    rows.extend(tight_fan_rows(3, 50)?);
    for n in [3, 10, 50] {
        let (_, lambda) = fan::build_tight_fan(n)?;
        for row in fan::check_continuation_lemma(n)? {
            let name = format!("tight-fan-{n}-v{}", row.k);
            rows.push(CheckRow::new("continuation_lemma", name, row.value, row.threshold, row.holds).at(&lambda));
        }
    }
    rows.extend(optimizer_rows(200)?);
    for (n, p) in [(5, scalar::ratio(1, 5)), (10, scalar::ratio(1, 10)), (20, scalar::ratio(1, 3)), (50, scalar::ratio(1, 50))] {
        let r = fan::check_convexity(n, &p, 1000)?;
        let top = r.integer_values.iter().max().cloned().unwrap_or_else(scalar::zero);
        let holds = r.holds();
        rows.push(CheckRow::new("convexity", format!("n={n},p={p}"), r.bound, top, holds));
    }
    let mono = fan::check_lambda_increasing(3, 1000)?;
    let g3 = fan::lambda_gap_function(3);
    let holds = mono.increasing && mono.at_least_one && g3 == scalar::ratio(28, 27);
    rows.push(CheckRow::new("gap_function_increasing", "n=3..1000", g3, scalar::one(), holds));
    let mass = fan::tight_fan_failure_mass(1000);
    let inv_e = Scalar::from_float((-1f64).exp()).expect("finite");
    let holds = bounds::within(&mass, &inv_e, &scalar::ratio(1, 1000));
    rows.push(CheckRow::new("tight_fan_limit", "tight-fan-1000", mass, inv_e, holds));
    Ok(rows)
}

/// For each `n` in the range: `λ_n < 1`, `π_s = 0`, and
/// `π_o = λ_n·(1−1/n)^{n−1}·(n−1)·c`.
pub fn tight_fan_rows(lo: usize, hi: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for n in lo..=hi {
        let (spec, lambda) = fan::build_tight_fan(n)?;
        let g = fan::build_fan(&spec)?;
        let (pi_o, pi_s) = fan::fan_payoffs(&spec, &lambda)?;
        let name = format!("tight-fan-{n}");
        let predicted = &lambda * fan::tight_fan_failure_mass(n);
        let holds = pi_o == predicted;
        rows.push(CheckRow::new("tight_fan_identity", &name, pi_o, predicted, holds).at(&lambda).on(&g));
        let holds = pi_s.is_zero();
        rows.push(CheckRow::new("tight_fan_sophisticated_zero", &name, pi_s, scalar::zero(), holds).at(&lambda).on(&g));
        let holds = lambda < scalar::one();
        rows.push(CheckRow::new("tight_fan_lambda_below_one", &name, scalar::one(), lambda.clone(), holds).at(&lambda));
    }
    Ok(rows)
}

/// Grid maximum of `∏(1−p_i)·Σp_i` for `k = 2..=6` against `(1−1/k)^k`:
/// within one grid cell of `1/k` and within `10⁻⁴` in value.
pub fn optimizer_rows(resolution: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for k in 2..=fan::MAX_OPTIMIZER_K {
        let opt = fan::maximize_failure_product(k, resolution)?;
        let closed = scalar::pow(&(scalar::one() - scalar::ratio(1, k as i64)), k as u32);
        let holds = opt.cells_from_uniform() <= scalar::one()
            && bounds::within(&opt.value, &closed, &scalar::ratio(1, 10_000));
        rows.push(CheckRow::new("failure_product_optimum", format!("k={k}"), opt.value, closed, holds));
    }
    Ok(rows)
}

const HARDNESS_LAMBDAS: [(i64, i64); 3] = [(1, 4), (1, 2), (1, 1)];

/// One row per random instance: every fourth recovers the count by binary
/// search on start decisions, the rest from the exact payoff.
pub fn hardness_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = generate::rng(seed.wrapping_add(2));
    (0..count)
        .map(|i| {
            let (num, den) = HARDNESS_LAMBDAS[i % 3];
            let lambda = scalar::ratio(num, den);
            let name = format!("knapsack-{seed}-{i}");
            if i % 4 == 3 {
                let inst = hardness::random_instance(&mut rng, 10, 50);
                knapsack_binary_row(&inst, &lambda, name)
            } else {
                let inst = hardness::random_instance(&mut rng, 12, 50);
                let c = match i % 3 {
                    0 => scalar::zero(),
                    1 => scalar::one(),
                    _ => scalar::int(inst.total_weight() as i64),
                };
                knapsack_count_row(&inst, &lambda, &c, name)
            }
        })
        .collect()
}

pub fn knapsack_count_row(inst: &KnapsackInstance, lambda: &Scalar, c: &Scalar, name: String) -> Result<CheckRow> {
    let brute = hardness::count_bruteforce(inst)?;
    let gadget = hardness::build_gadget(inst, lambda, c)?;
    let eval = gadget.evaluate()?;
    let (recovered, holds) = match hardness::recover_count(&eval.start_value, inst, lambda, c) {
        Ok(n) => (scalar::int(n as i64), n == brute),
        Err(Error::NonIntegerCount(_)) => (scalar::int(-1), false),
        Err(e) => return Err(e),
    };
    let holds = holds && eval.start_value == gadget.predicted_payoff(brute);
    Ok(CheckRow::new("knapsack_count", name, recovered, scalar::int(brute as i64), holds)
        .at(lambda)
        .on(&gadget.graph))
}

pub fn knapsack_binary_row(inst: &KnapsackInstance, lambda: &Scalar, name: String) -> Result<CheckRow> {
    let brute = hardness::count_bruteforce(inst)?;
    let found = hardness::binary_search_count(inst, lambda)?;
    let holds = found == brute;
    let mut row = CheckRow::new("knapsack_binary_search", name, scalar::int(found as i64), scalar::int(brute as i64), holds)
        .at(lambda);
    if !holds {
        row.counterexample = Some(hardness::build_gadget(inst, lambda, &scalar::zero())?.graph);
    }
    Ok(row)
}
