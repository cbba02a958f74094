//! Random fans checked against π_o − π_s ≤ λ(1−1/n)ⁿR, plus the cost lemma
//! at the optimal stopping node.
//!
//! cargo run --example fan_bound

use sunkcost::fan;
use sunkcost::generate;
use sunkcost::scalar::{ratio, to_f64};

fn main() -> sunkcost::Result<()> {
    let mut rng = generate::rng(11);
    let lambda = ratio(3, 4);
    let mut tightest: f64 = 0.0;
    for i in 0..200 {
        let spec = fan::random_fan(&mut rng, 8);
        let report = fan::check_fan_bound(&spec, &lambda)?;
        assert!(report.holds, "fan {i}: {}", report.csv_row());
        assert!(fan::check_fan_cost_bound(&spec)?);
        let (o, s) = fan::fan_payoffs(&spec, &lambda)?;
        let bound = fan::fan_bound_rhs(spec.n(), &lambda, &spec.reward);
        tightest = tightest.max(to_f64(&(o - s)) / to_f64(&bound));
    }
    println!("200 random fans, lambda = {lambda}: bound holds, largest gap/bound = {tightest:.4}");

    for n in [3, 10, 50] {
        let (spec, lambda) = fan::build_tight_fan(n)?;
        let (o, s) = fan::fan_payoffs(&spec, &lambda)?;
        let bound = fan::fan_bound_rhs(n, &lambda, &spec.reward);
        println!("tight fan n={n}: gap = {:.6}, bound = {:.6}", to_f64(&(o - s)), to_f64(&bound));
    }
    Ok(())
}
