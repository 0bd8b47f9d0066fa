//! Runs one hand-written grid under the multi-lane rules and prints its trace.
//!
//! `cargo run --example single_run`

use exitroad::sim::{self, check_trace_invariants};
use exitroad::{parse_grid, Variant};

fn main() {
    let grid = parse_grid("3 4\nCECC\nC.CC\nECCC\n").expect("valid grid");
    let v = Variant::MultiLane;
    let cap = sim::default_cap(&grid, v);
    let result = sim::run(&grid, v, cap, true).expect("legal input");
    let trace = result.trace.as_ref().expect("trace requested");

    print!("{}", trace.to_text());
    println!(
        "stopped: {} after {} ticks (cap {cap}), busiest exiting agent made {} East/West moves",
        result.stop, result.ticks, result.max_ew_moves
    );
    println!("invariant violations: {}", check_trace_invariants(trace, v).len());
}
