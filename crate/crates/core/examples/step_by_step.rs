//! Drives the engine one tick at a time and lists every applied move.

use exitroad::grid::Constraint;
use exitroad::sim::SimState;
use exitroad::{parse_grid, RuleTable, Variant};

fn main() {
    let table = RuleTable::build(Variant::MultiLane);
    let mut state = SimState::new(parse_grid("2 3\n.EC\nCCC\n").unwrap());
    while !state.grid().is_target(Constraint::C1) {
        let t = state.time();
        let moves = state.step(&table).expect("shipped table never faults").to_vec();
        for mv in &moves {
            println!(
                "t={t} agent {} ({}) {} {:?} -> {:?}",
                mv.agent,
                mv.kind,
                mv.dir.letter(),
                mv.from,
                mv.to
            );
        }
    }
    print!("target after {} ticks:\n{}", state.elapsed(), state.grid().body());
}
