//! Library-level sweeps, the same rows `sunkcost sweep` prints.
//!
//! cargo run --example sweep

use sunkcost::cli::sweep::{self, Family, SweepSpec, SWEEP_CSV_HEADER};

fn main() -> sunkcost::Result<()> {
    let spec = SweepSpec {
        family: Family::RandomFans,
        n_range: (2, 6),
        lambdas: sweep::default_lambdas(Family::RandomFans),
        epsilons: vec![],
        seed: Some(5),
        count: 4,
    };
    println!("{SWEEP_CSV_HEADER}");
    for row in sweep::run_sweep(&spec)? {
        println!("{row}");
    }
    Ok(())
}
