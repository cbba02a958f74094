//! Counting knapsack solutions by evaluating one sophisticated agent, and
//! by binary search over start/don't-start answers.
//!
//! cargo run --example knapsack_reduction

use sunkcost::hardness::{self, KnapsackInstance};
use sunkcost::scalar::{int, ratio};

fn main() -> sunkcost::Result<()> {
    let inst = KnapsackInstance::new(vec![3, 1, 4, 1, 5], 6);
    let lambda = ratio(1, 2);
    let gadget = hardness::build_gadget(&inst, &lambda, &int(0))?;
    let eval = gadget.evaluate()?;
    println!("weights {:?}, capacity {}", inst.weights, inst.capacity);
    println!("gadget: {} nodes, R = {}", gadget.graph.node_count(), gadget.reward);
    println!("start value {}", eval.start_value);
    println!("count via gadget        {}", hardness::recover_count(&eval.start_value, &inst, &lambda, &int(0))?);
    println!("count via binary search {}", hardness::binary_search_count(&inst, &lambda)?);
    println!("count by brute force    {}", hardness::count_bruteforce(&inst)?);
    Ok(())
}
