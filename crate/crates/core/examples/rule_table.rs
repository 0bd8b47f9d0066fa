//! Inspects the shipped rule tables: size, one lookup, and the CSV dump.

use exitroad::fsm::RuleKey;
use exitroad::grid::{Neighborhood, Reading};
use exitroad::{AgentKind, AgentState, PositionClass, RuleTable, Variant};

fn main() {
    for v in [Variant::MultiLane, Variant::TwoLane] {
        println!("{}: {} defined inputs", v.name(), RuleTable::build(v).entries().count());
    }
    let table = RuleTable::build(Variant::MultiLane);
    // An exiting agent inside the grid at tick 3 with a free cell to its West.
    let key = RuleKey {
        kind: AgentKind::Exiting,
        state: AgentState::new(false, 3),
        position: PositionClass::Interior,
        neighborhood: Neighborhood::new(Reading::Agent, Reading::Agent, Reading::Agent, Reading::Empty),
    };
    println!("{:?}", table.lookup(&key).unwrap());
    if std::env::args().any(|a| a == "--csv") {
        print!("{}", table.to_csv());
    }
}
