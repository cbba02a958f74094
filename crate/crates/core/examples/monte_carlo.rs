//! Seeded Monte Carlo against the exact payoff and against path enumeration.
//!
//! cargo run --release --example monte_carlo

use sunkcost::agents::{self, Agent};
use sunkcost::generate;
use sunkcost::oracle;
use sunkcost::scalar::{ratio, to_f64};

fn main() -> sunkcost::Result<()> {
    let mut rng = generate::rng(99);
    for i in 0..5 {
        let g = generate::random_graph(&mut rng, 10);
        let agent = Agent::sophisticated(ratio(1, 2));
        let exact = agents::evaluate(&g, &agent)?.payoff;
        let outcomes = oracle::enumerate_outcomes(&g, &agent)?;
        assert_eq!(oracle::outcome_payoff(&outcomes, &g.reward), exact);
        let est = oracle::monte_carlo(&g, &agent, 100_000, 1000 + i)?;
        let z = (est.mean - to_f64(&exact)) / est.stderr.max(f64::MIN_POSITIVE);
        println!(
            "graph {i}: {} nodes, {} paths, exact {:.6}, estimate {:.6} ± {:.6} (z = {z:+.2})",
            g.node_count(),
            outcomes.len(),
            to_f64(&exact),
            est.mean,
            est.stderr
        );
    }
    Ok(())
}
