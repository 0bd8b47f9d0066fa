//! A deliberately broken rule table is caught by the exhaustive verifier.

use exitroad::bounds::Q;
use exitroad::verify::verify_all_with;
use exitroad::{RuleTable, Variant};

fn main() {
    let broken = RuleTable::corrupted(Variant::MultiLane);
    let report = verify_all_with(3, 3, &broken, Q::from_integer(2)).unwrap();
    println!("{}", report.summary());
    if let Some(f) = report.failures.first() {
        println!("first failure ({:?}):\n{}", f.kind, f.config.to_text());
        println!("replay:\n{}", f.replay);
    }
}
