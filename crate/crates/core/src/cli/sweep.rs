//! Parameter sweeps behind `sweep`.

use std::fmt;
use std::str::FromStr;

use crate::agents::{self, Agent, AgentKind};
use crate::bounds;
use crate::error::{Error, Result};
use crate::fan;
use crate::generate;
use crate::graph::{TaskGraph, TieBreak};
use crate::hardness;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TightFan,
    ThreeNodeTight,
    EdgeCostTight,
    RandomGraphs,
    RandomFans,
    KnapsackRandom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::TightFan => "tight-fan",
            Family::ThreeNodeTight => "three-node-tight",
            Family::EdgeCostTight => "edge-cost-tight",
            Family::RandomGraphs => "random-graphs",
            Family::RandomFans => "random-fans",
            Family::KnapsackRandom => "knapsack-random",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, Family::RandomGraphs | Family::RandomFans | Family::KnapsackRandom)
    }

    fn uses_lambda(self) -> bool {
        self != Family::TightFan
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            Family::TightFan,
            Family::ThreeNodeTight,
            Family::EdgeCostTight,
            Family::RandomGraphs,
            Family::RandomFans,
            Family::KnapsackRandom,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| format!("unknown sweep family {s:?}"))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    /// Inclusive range: path length for fans, maximum size for random
    /// families.
    pub n_range: (usize, usize),
    pub lambdas: Vec<Scalar>,
    pub epsilons: Vec<Scalar>,
    pub seed: Option<u64>,
    /// Instances per parameter point for random families.
    pub count: usize,
}

impl SweepSpec {
    pub fn check(&self) -> Result<()> {
        if self.n_range.0 > self.n_range.1 {
            return Err(Error::Param(format!("empty n range {}..{}", self.n_range.0, self.n_range.1)));
        }
        if self.family.uses_lambda() && self.lambdas.is_empty() {
            return Err(Error::Param("empty lambda grid".into()));
        }
        if self.family == Family::EdgeCostTight && self.epsilons.is_empty() {
            return Err(Error::Param("empty epsilon grid".into()));
        }
        if self.family.is_random() && self.seed.is_none() {
            return Err(Error::Param(format!("{} needs --seed", self.family)));
        }
        if self.family.is_random() && self.count == 0 {
            return Err(Error::Param("count must be at least 1".into()));
        }
        Ok(())
    }
}

pub const SWEEP_CSV_HEADER: &str = "family,n,lambda,epsilon,pi_o,pi_s,pi_h,p_success,bound_rhs,gap,\
pi_o_dec,pi_s_dec,pi_h_dec,p_success_dec,bound_rhs_dec,gap_dec";

/// One parameter point. `gap = π_o − π_s`; `bound_rhs` is the largest gap
/// the family's bound allows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub family: Family,
    pub n: usize,
    pub lambda: Scalar,
    pub epsilon: Option<Scalar>,
    pub pi_o: Scalar,
    pub pi_s: Scalar,
    pub pi_h: Scalar,
    pub p_success: Scalar,
    pub bound_rhs: Scalar,
    pub gap: Scalar,
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eps = self.epsilon.as_ref().map(|e| e.to_string()).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            self.family, self.n, self.lambda, eps, self.pi_o, self.pi_s, self.pi_h, self.p_success, self.bound_rhs, self.gap
        )?;
        for x in [&self.pi_o, &self.pi_s, &self.pi_h, &self.p_success, &self.bound_rhs, &self.gap] {
            write!(f, ",{}", scalar::to_decimal(x))?;
        }
        Ok(())
    }
}

struct Point<'a> {
    family: Family,
    graph: &'a TaskGraph,
    n: usize,
    lambda: &'a Scalar,
    epsilon: Option<Scalar>,
    tie: TieBreak,
}

fn measure(p: Point<'_>, bound_rhs: impl FnOnce(&bounds::PayoffDecomposition) -> Scalar) -> Result<SweepRow> {
    let d = bounds::decompose_optimal(p.graph)?;
    let run = |kind| -> Result<Scalar> {
        Ok(agents::evaluate(p.graph, &Agent::new(kind, p.lambda.clone(), p.tie)?)?.payoff)
    };
    let pi_s = run(AgentKind::Sophisticated)?;
    let pi_h = run(AgentKind::Hybrid)?;
    Ok(SweepRow {
        family: p.family,
        n: p.n,
        lambda: p.lambda.clone(),
        epsilon: p.epsilon,
        bound_rhs: bound_rhs(&d),
        gap: &d.payoff - &pi_s,
        pi_o: d.payoff,
        pi_s,
        pi_h,
        p_success: d.p_success,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let (lo, hi) = spec.n_range;
    let mut rows = Vec::new();
    let seed = spec.seed.unwrap_or(0);
    match spec.family {
        Family::TightFan => {
            for n in lo.max(3)..=hi {
                let (fan_spec, lambda) = fan::build_tight_fan(n)?;
                let g = fan::build_fan(&fan_spec)?;
                let point = Point { family: spec.family, graph: &g, n, lambda: &lambda, epsilon: None, tie: TieBreak::ContinueOnTie };
                rows.push(measure(point, |_| fan::fan_bound_rhs(n, &lambda, &scalar::one()))?);
            }
        }
        Family::ThreeNodeTight => {
            let precision = bounds::default_precision();
            for lambda in &spec.lambdas {
                let g = bounds::build_three_node_tight(lambda, &scalar::one(), &precision)?;
                let (c_lo, c_hi) = bounds::three_node_coefficient(lambda, &precision)?;
                let point = Point { family: spec.family, graph: &g, n: 3, lambda, epsilon: None, tie: TieBreak::ContinueOnTie };
                rows.push(measure(point, |_| (c_lo + c_hi) / scalar::int(2))?);
            }
        }
        Family::EdgeCostTight => {
            for lambda in &spec.lambdas {
                for eps in &spec.epsilons {
                    let g = bounds::build_edge_cost_tight(lambda, eps)?;
                    let point = Point { family: spec.family, graph: &g, n: 3, lambda, epsilon: Some(eps.clone()), tie: TieBreak::ContinueOnTie };
                    rows.push(measure(point, |_| lambda / (scalar::one() + lambda))?);
                }
            }
        }
        Family::RandomGraphs => {
            let mut rng = generate::rng(seed);
            for _ in 0..spec.count {
                let g = generate::random_graph(&mut rng, hi.max(3));
                for lambda in &spec.lambdas {
                    let point = Point { family: spec.family, graph: &g, n: g.node_count(), lambda, epsilon: None, tie: TieBreak::ContinueOnTie };
                    rows.push(measure(point, |d| lambda * d.failure_mass())?);
                }
            }
        }
        Family::RandomFans => {
            let mut rng = generate::rng(seed);
            for _ in 0..spec.count {
                let fan_spec = fan::random_fan(&mut rng, hi.max(2));
                let g = fan::build_fan(&fan_spec)?;
                let n = fan_spec.n();
                for lambda in &spec.lambdas {
                    let point = Point { family: spec.family, graph: &g, n, lambda, epsilon: None, tie: TieBreak::ContinueOnTie };
                    rows.push(measure(point, |_| fan::fan_bound_rhs(n, lambda, &fan_spec.reward))?);
                }
            }
        }
        Family::KnapsackRandom => {
            let mut rng = generate::rng(seed);
            for _ in 0..spec.count {
                let inst = hardness::random_instance(&mut rng, hi.clamp(1, 12), 50);
                for lambda in &spec.lambdas {
                    let gadget = hardness::build_gadget(&inst, lambda, &scalar::zero())?;
                    let point = Point { family: spec.family, graph: &gadget.graph, n: inst.n(), lambda, epsilon: None, tie: TieBreak::StopOnTie };
                    rows.push(measure(point, |d| lambda * d.failure_mass())?);
                }
            }
        }
    }
    Ok(rows)
}

/// Default λ grid for a family.
pub fn default_lambdas(family: Family) -> Vec<Scalar> {
    match family {
        Family::ThreeNodeTight => vec![
            scalar::ratio(1, 4),
            scalar::ratio(1, 2),
            scalar::one(),
            scalar::int(2),
            scalar::int(10),
        ],
        Family::EdgeCostTight => vec![scalar::ratio(1, 2)],
        _ => vec![scalar::ratio(1, 4), scalar::ratio(1, 2), scalar::one()],
    }
}

pub fn default_epsilons() -> Vec<Scalar> {
    vec![scalar::ratio(1, 10), scalar::ratio(1, 100), scalar::ratio(1, 1000)]
}
