//! The tight fan family: optimal payoff against λ_n times the failure mass,
//! and how the gap approaches λ/e.
//!
//! cargo run --example tight_fan

use sunkcost::agents;
use sunkcost::fan;
use sunkcost::scalar::to_f64;
use sunkcost::TieBreak;

fn main() -> sunkcost::Result<()> {
    println!("{:>4} {:>10} {:>12} {:>12} {:>10}", "n", "lambda_n", "pi_o", "pi_s", "gap/(λ/e)");
    for n in [3, 4, 5, 8, 12, 20, 35, 50] {
        let (spec, lambda) = fan::build_tight_fan(n)?;
        let g = fan::build_fan(&spec)?;
        let o = agents::eval_optimal(&g)?.payoff;
        let s = agents::eval_sophisticated(&g, &lambda, TieBreak::ContinueOnTie)?.payoff;
        assert_eq!(o, &lambda * fan::tight_fan_failure_mass(n));
        let ratio = to_f64(&(&o - &s)) / (to_f64(&lambda) / std::f64::consts::E);
        println!("{n:>4} {:>10.6} {:>12.8} {:>12} {ratio:>10.5}", to_f64(&lambda), to_f64(&o), s);
    }

    let (spec, lambda) = fan::build_tight_fan(3)?;
    println!("\nn = 3: lambda = {lambda}, costs = {:?}", spec.costs.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    Ok(())
}
