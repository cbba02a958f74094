//! The three-node coefficient (2+λ−2√(1+λ))/λ and the instance that attains it.
//!
//! cargo run --example three_node

use sunkcost::bounds;
use sunkcost::scalar::{one, parse, to_f64};

fn main() -> sunkcost::Result<()> {
    let precision = bounds::default_precision();
    println!("{:>6} {:>14} {:>14} {:>14}", "lambda", "coefficient", "pi_o - pi_s", "lambda/(1+l)");
    for text in ["1/10", "1/4", "1/2", "1", "2", "10"] {
        let lambda = parse(text).expect("literal");
        let (lo, _) = bounds::three_node_coefficient(&lambda, &precision)?;
        let g = bounds::build_three_node_tight(&lambda, &one(), &precision)?;
        let (o, s, _) = bounds::payoff_triple(&g, &lambda)?;
        let report = bounds::check_three_node_bound(&g, &lambda, &precision)?;
        assert!(report.holds);
        let closed = to_f64(&lambda) / (1.0 + to_f64(&lambda));
        println!("{text:>6} {:>14.10} {:>14.10} {closed:>14.10}", to_f64(&lo), to_f64(&(o - s)));
    }
    Ok(())
}
