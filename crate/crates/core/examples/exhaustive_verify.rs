//! Exhaustive check of every legal start on small boards, both variants.

use exitroad::bounds::Q;
use exitroad::verify::{verify_all, verify_memory_robustness};
use exitroad::Variant;

fn main() {
    for (n, m, v, factor) in [
        (2, 3, Variant::MultiLane, 2),
        (3, 3, Variant::MultiLane, 2),
        (3, 2, Variant::TwoLane, 1),
        (4, 2, Variant::TwoLane, 1),
    ] {
        let report = verify_all(n, m, v, Q::from_integer(factor)).unwrap();
        println!("{} {n}x{m}: {}", v.name(), report.summary());
        if !report.ok() {
            print!("{}", report.failures_text());
        }
    }
    // Arbitrary initial direction bits instead of the all-zero memory.
    let r = verify_memory_robustness(2, 3, Variant::MultiLane).unwrap();
    println!("A 2x3 with every initial direction assignment: {}", r.summary());
}
