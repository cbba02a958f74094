//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use sunkcost::agents::{self, Agent, AgentKind};
use sunkcost::bounds;
use sunkcost::cli::verify;
use sunkcost::fan;
use sunkcost::generate;
use sunkcost::graph::{motivating_example, TaskGraph, TieBreak};
use sunkcost::hardness;
use sunkcost::oracle;
use sunkcost::scalar::{self, int, ratio};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn failed_rows(rows: &[verify::CheckRow]) -> Vec<String> {
    rows.iter().filter(|r| !r.holds).map(|r| r.to_string()).collect()
}

fn motivating() -> Outcome {
    let g = motivating_example(&int(1), &int(10));
    let half = ratio(1, 2);
    let o = agents::eval_optimal(&g).map_err(|e| e.to_string())?.payoff;
    let s = agents::eval_sophisticated(&g, &half, TieBreak::ContinueOnTie).map_err(|e| e.to_string())?.payoff;
    let n = agents::eval_naive(&g, &half, TieBreak::ContinueOnTie).map_err(|e| e.to_string())?.payoff;
    let h = agents::eval_hybrid(&g, &half, TieBreak::ContinueOnTie).map_err(|e| e.to_string())?.payoff;
    ensure(o == int(1) && s == int(0) && n == int(0) && h == int(0), || {
        format!("pi_o={o} pi_s={s} pi_naive={n} pi_h={h}")
    })?;
    Ok("pi_o=1 pi_s=0 pi_naive=0 pi_h=0".into())
}

fn tight_fan() -> Outcome {
    let rows = verify::tight_fan_rows(3, 50).map_err(|e| e.to_string())?;
    let bad = failed_rows(&rows);
    ensure(bad.is_empty(), || bad.join("; "))?;
    let (_, l3) = fan::build_tight_fan(3).map_err(|e| e.to_string())?;
    ensure(l3 == ratio(15, 16), || format!("lambda_3 = {l3}"))?;
    let g3 = fan::lambda_gap_function(3);
    ensure(g3 == ratio(28, 27), || format!("f(3) = {g3}"))?;
    // Independent oracle for the asymptotic quantity: direct f64 evaluation.
    let n = 1000f64;
    let direct = (1.0 - 1.0 / n).powf(n - 1.0) * (n - 1.0) * (1.0 / n - 1.0 / (n * n));
    let exact = scalar::to_f64(&fan::tight_fan_failure_mass(1000));
    let e_inv = (-1f64).exp();
    ensure((exact - direct).abs() < 1e-12, || format!("exact {exact} vs direct {direct}"))?;
    ensure((exact - e_inv).abs() <= 1e-3, || format!("|{exact} - 1/e| > 1e-3"))?;
    Ok(format!("n=3..50 exact; lambda_3=15/16; f(3)=28/27; n=1000 mass {exact:.6} vs 1/e {e_inv:.6}"))
}

fn fan_bound() -> Outcome {
    let mut rng = generate::rng(2024);
    let mut checks = 0;
    for i in 0..500 {
        let spec = fan::random_fan(&mut rng, 12);
        for lambda in [ratio(1, 4), ratio(1, 2), int(1)] {
            let r = fan::check_fan_bound(&spec, &lambda).map_err(|e| e.to_string())?;
            ensure(r.holds, || format!("fan {i} at lambda {lambda}: {} < {}", r.lhs, r.rhs))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} checks, 0 violations"))
}

fn general_bounds() -> Outcome {
    let mut rng = generate::rng(4242);
    let mut checks = 0;
    for i in 0..500 {
        let g = generate::random_graph(&mut rng, 10);
        for lambda in [ratio(1, 4), ratio(1, 2), int(1), int(2)] {
            for r in bounds::general_reports(&g, &lambda).map_err(|e| e.to_string())? {
                ensure(r.holds, || format!("graph {i}, {} at lambda {lambda}: {} < {}", r.bound, r.lhs, r.rhs))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} checks, 0 violations"))
}

fn three_node() -> Outcome {
    let precision = bounds::default_precision();
    let mut worst_gap_err = 0f64;
    for lambda in [ratio(1, 4), ratio(1, 2), int(1), int(2), int(10)] {
        let g = bounds::build_three_node_tight(&lambda, &int(1), &precision).map_err(|e| e.to_string())?;
        let (o, s, _) = bounds::payoff_triple(&g, &lambda).map_err(|e| e.to_string())?;
        let l = scalar::to_f64(&lambda);
        let coef = (2.0 + l - 2.0 * (1.0 + l).sqrt()) / l;
        let gap = scalar::to_f64(&(&o - &s));
        ensure(scalar::to_f64(&s).abs() <= 1e-10, || format!("|pi_s| = {s} at lambda {lambda}"))?;
        // Exact enclosure of the coefficient, so the 1e-9 check is not
        // limited by f64 rounding.
        let (lo, hi) = bounds::three_node_coefficient(&lambda, &ratio(1, 1_000_000_000_000_000)).map_err(|e| e.to_string())?;
        let mid = (lo + hi) / int(2);
        let err = scalar::abs(&(&o - &s - mid));
        ensure(err <= ratio(1, 1_000_000_000), || format!("gap error {err} at lambda {lambda}"))?;
        ensure((gap - coef).abs() < 1e-9, || format!("f64 gap {gap} vs {coef}"))?;
        worst_gap_err = worst_gap_err.max(scalar::to_f64(&err));
        if lambda == int(1) {
            let target = 3.0 - 2.0 * 2f64.sqrt();
            ensure((gap - target).abs() < 1e-9 && gap <= 0.172, || format!("lambda=1 gap {gap}"))?;
        }
    }
    let mut rng = generate::rng(33);
    for i in 0..1000 {
        let g = bounds::random_three_node(&mut rng);
        for lambda in [ratio(1, 4), ratio(1, 2), int(1), int(2), int(10)] {
            let r = bounds::check_three_node_bound(&g, &lambda, &precision).map_err(|e| e.to_string())?;
            ensure(r.holds, || format!("three-node graph {i} at lambda {lambda}: {} < {}", r.lhs, r.rhs))?;
        }
    }
    Ok(format!("tight gaps within {worst_gap_err:.1e}; 1000 random graphs x 5 lambdas hold"))
}

fn edge_cost() -> Outcome {
    let lambda = ratio(1, 2);
    let eps = ratio(1, 100);
    let g = bounds::build_edge_cost_tight(&lambda, &eps).map_err(|e| e.to_string())?;
    let o = agents::eval_optimal(&g).map_err(|e| e.to_string())?.payoff;
    let s = agents::eval_sophisticated(&g, &lambda, TieBreak::ContinueOnTie).map_err(|e| e.to_string())?.payoff;
    ensure(s == int(0) && o == ratio(1, 3) - &eps, || format!("pi_o={o} pi_s={s}"))?;
    Ok(format!("pi_o={o} pi_s=0"))
}

fn hardness_reduction() -> Outcome {
    let mut rng = generate::rng(77);
    let lambdas = [ratio(1, 4), ratio(1, 2), int(1)];
    for i in 0..100 {
        let inst = hardness::random_instance(&mut rng, 12, 50);
        let lambda = &lambdas[i % 3];
        let c = match i % 3 {
            0 => int(0),
            1 => int(1),
            _ => int(inst.total_weight() as i64),
        };
        let brute = hardness::count_bruteforce(&inst).map_err(|e| e.to_string())?;
        let got = hardness::count_via_gadget(&inst, lambda, &c).map_err(|e| e.to_string())?;
        ensure(got == brute, || format!("instance {i} {inst:?}: gadget {got}, brute force {brute}"))?;
    }
    for i in 0..25 {
        let inst = hardness::random_instance(&mut rng, 10, 50);
        let lambda = &lambdas[i % 3];
        let brute = hardness::count_bruteforce(&inst).map_err(|e| e.to_string())?;
        let got = hardness::binary_search_count(&inst, lambda).map_err(|e| e.to_string())?;
        ensure(got == brute, || format!("binary search {i} {inst:?}: {got} vs {brute}"))?;
    }
    Ok("100 payoff recoveries and 25 binary searches match brute force".into())
}

fn optimizer() -> Outcome {
    let mut worst = 0f64;
    for k in 2..=6usize {
        let opt = fan::maximize_failure_product(k, 200).map_err(|e| e.to_string())?;
        ensure(opt.cells_from_uniform() <= int(1), || format!("k={k}: argmax {:?}", opt.argmax))?;
        let closed = (1.0 - 1.0 / k as f64).powi(k as i32);
        let err = (scalar::to_f64(&opt.value) - closed).abs();
        ensure(err <= 1e-4, || format!("k={k}: value {} vs {closed}", scalar::to_f64(&opt.value)))?;
        worst = worst.max(err);
    }
    Ok(format!("k=2..6 within one cell; worst value error {worst:.1e}"))
}

fn corpus() -> Vec<TaskGraph> {
    let mut graphs = vec![
        motivating_example(&int(1), &int(10)),
        bounds::build_edge_cost_tight(&ratio(1, 2), &ratio(1, 100)).unwrap(),
        bounds::build_three_node_tight(&int(1), &int(1), &bounds::default_precision()).unwrap(),
        hardness::build_gadget(&hardness::KnapsackInstance::new(vec![3, 1, 4, 1], 5), &ratio(1, 2), &int(1))
            .unwrap()
            .graph,
    ];
    for n in 3..=11 {
        graphs.push(fan::build_fan(&fan::build_tight_fan(n).unwrap().0).unwrap());
    }
    let mut rng = generate::rng(9);
    for _ in 0..300 {
        graphs.push(generate::random_graph(&mut rng, 12));
    }
    graphs
}

fn oracle_equivalence() -> Outcome {
    let graphs = corpus();
    let mut compared = 0;
    for (i, g) in graphs.iter().enumerate() {
        for kind in AgentKind::ALL {
            for tie in [TieBreak::ContinueOnTie, TieBreak::StopOnTie] {
                let lambda = if kind == AgentKind::Optimal { int(0) } else { ratio(1, 2) };
                let agent = Agent::new(kind, lambda, tie).map_err(|e| e.to_string())?;
                let dp = agents::evaluate(g, &agent).map_err(|e| e.to_string())?.payoff;
                let outcomes = oracle::enumerate_outcomes(g, &agent).map_err(|e| e.to_string())?;
                ensure(oracle::conserves_probability(&outcomes), || format!("graph {i}: mass lost"))?;
                let en = oracle::outcome_payoff(&outcomes, &g.reward);
                ensure(dp == en, || format!("graph {i} {kind} {}: dp {dp} vs enumeration {en}", tie.as_str()))?;
                compared += 1;
            }
        }
    }
    let mut rng = generate::rng(31);
    let mut worst_z = 0f64;
    for i in 0..20 {
        let g = generate::random_graph(&mut rng, 10);
        let agent = Agent::sophisticated(ratio(1, 2));
        let exact = scalar::to_f64(&agents::evaluate(&g, &agent).map_err(|e| e.to_string())?.payoff);
        let est = oracle::monte_carlo(&g, &agent, 100_000, 1000 + i).map_err(|e| e.to_string())?;
        let dev = (est.mean - exact).abs();
        if est.stderr == 0.0 {
            ensure(dev < 1e-9, || format!("graph {i}: constant payoff {exact}, mean {}", est.mean))?;
        } else {
            ensure(dev <= 3.0 * est.stderr, || {
                format!("graph {i}: mean {} vs exact {exact}, stderr {}", est.mean, est.stderr)
            })?;
            worst_z = worst_z.max(dev / est.stderr);
        }
    }
    Ok(format!("{compared} exact comparisons on {} graphs; Monte Carlo worst |z| {worst_z:.2}", graphs.len()))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 motivating example", Duration::from_millis(1), motivating),
        ("2 tight fan family", Duration::from_secs(5), tight_fan),
        ("3 fan bound", Duration::from_secs(30), fan_bound),
        ("4 general bounds and ordering", Duration::from_secs(60), general_bounds),
        ("5 three-node tightness", Duration::from_secs(10), three_node),
        ("6 edge-cost model", Duration::from_millis(1), edge_cost),
        ("7 hardness reduction", Duration::from_secs(60), hardness_reduction),
        ("8 optimizer claim", Duration::from_secs(30), optimizer),
        ("9 oracle equivalence", Duration::from_secs(120), oracle_equivalence),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(_) if elapsed > budget => Err(format!("over budget ({elapsed:?} > {budget:?})")),
            other => other,
        };
        match verdict {
            Ok(detail) => println!("PASS criterion {name} [{elapsed:.2?}] {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {name} [{elapsed:.2?}] {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
