//! The four-node example: every agent kind on the same graph, plus the
//! sophisticated agent's decision trace.
//!
//! cargo run --example motivating_example

use sunkcost::agents::{self, Agent, AgentKind, TRACE_CSV_HEADER};
use sunkcost::graph::motivating_example;
use sunkcost::scalar::{int, ratio};
use sunkcost::TieBreak;

fn main() -> sunkcost::Result<()> {
    let g = motivating_example(&int(1), &int(10));
    let lambda = ratio(1, 2);
    for kind in [AgentKind::Optimal, AgentKind::Naive, AgentKind::Sophisticated, AgentKind::Hybrid] {
        for tie in [TieBreak::ContinueOnTie, TieBreak::StopOnTie] {
            let e = agents::evaluate(&g, &Agent::new(kind, lambda.clone(), tie)?)?;
            println!(
                "{:<13} tie={:<8} payoff={:<4} reach={:<4} starts={}",
                kind.as_str(),
                tie.as_str(),
                e.payoff,
                e.reach_prob,
                e.starts
            );
        }
    }

    println!("\n{TRACE_CSV_HEADER}");
    for d in agents::policy_trace(&g, &Agent::sophisticated(lambda))? {
        println!("{}", agents::trace_csv_row(&d));
    }
    Ok(())
}
