//! Grid maximization of ∏(1−p_i)·Σp_i over the probability simplex.
//!
//! cargo run --release --example optimizer

use sunkcost::fan;
use sunkcost::scalar::to_f64;

fn main() -> sunkcost::Result<()> {
    for k in 2..=fan::MAX_OPTIMIZER_K {
        let best = fan::maximize_failure_product(k, 200)?;
        let argmax: Vec<String> = best.argmax.iter().map(|p| format!("{:.3}", to_f64(p))).collect();
        println!(
            "k = {k}: value {:.6} at [{}], {} cells from uniform",
            to_f64(&best.value),
            argmax.join(", "),
            best.cells_from_uniform()
        );
    }
    Ok(())
}
