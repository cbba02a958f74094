//! Every general bound on a batch of random task graphs, as CSV.
//!
//! cargo run --example general_bounds

use sunkcost::bounds::{self, BOUND_CSV_HEADER};
use sunkcost::generate;
use sunkcost::scalar::ratio;

fn main() -> sunkcost::Result<()> {
    let mut rng = generate::rng(2024);
    println!("{BOUND_CSV_HEADER}");
    let mut violations = 0;
    for i in 0..10 {
        let g = generate::random_graph(&mut rng, 9);
        for lambda in [ratio(1, 4), ratio(2, 1)] {
            for r in bounds::general_reports(&g, &lambda)? {
                violations += usize::from(!r.holds);
                println!("{}", r.with_ref(format!("random-{i}")).csv_row());
            }
        }
    }
    eprintln!("violations: {violations}");
    Ok(())
}
