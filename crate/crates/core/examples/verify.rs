//! Run a verification suite in-process and summarize it.
//!
//! cargo run --release --example verify

use sunkcost::cli::verify::{self, Suite};

fn main() -> sunkcost::Result<()> {
    for suite in [Suite::Bounds, Suite::Fan, Suite::Hardness] {
        let rows = verify::run_suite(suite, 7, 30)?;
        let failed = rows.iter().filter(|r| !r.holds).count();
        println!("{suite:?}: {} checks, {failed} failed", rows.len());
    }
    Ok(())
}
