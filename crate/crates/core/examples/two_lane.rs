//! Two-column sorting: exiting agents end up East, continue agents West.

use exitroad::bounds::{ceil_ticks, twolane_bounds};
use exitroad::sim;
use exitroad::{parse_grid, Variant};

fn main() {
    let grid = parse_grid("5 2\nEC\nE.\nCE\nEC\nC.\n").unwrap();
    let counts = grid.counts();
    let (worst, mean) = twolane_bounds(5, counts.empty as u64, counts.exiting as u64).unwrap();
    let result = sim::run(&grid, Variant::TwoLane, worst, true).unwrap();
    let last = result.trace.as_ref().unwrap().snapshots().last().unwrap().1.clone();
    print!("start:\n{}end:\n{}", grid.body(), last.body());
    println!(
        "{} in {} ticks; worst-case bound {worst}, expected-time bound {}",
        result.stop,
        result.ticks,
        ceil_ticks(mean)
    );
}
