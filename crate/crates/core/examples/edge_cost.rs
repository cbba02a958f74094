//! With costs on edges the gap climbs to λ/(1+λ)·R as ε shrinks.
//!
//! cargo run --example edge_cost

use sunkcost::bounds;
use sunkcost::scalar::{ratio, to_f64};

fn main() -> sunkcost::Result<()> {
    let lambda = ratio(1, 2);
    for den in [10, 100, 1000, 10_000] {
        let eps = ratio(1, den);
        let g = bounds::build_edge_cost_tight(&lambda, &eps)?;
        let (o, s, h) = bounds::payoff_triple(&g, &lambda)?;
        let r = bounds::check_closed_form(&g, &lambda)?;
        println!("eps = {eps:<8} pi_o = {:<10.6} pi_s = {s} pi_h = {:<10.6} slack = {}", to_f64(&o), to_f64(&h), r.slack());
    }
    Ok(())
}
