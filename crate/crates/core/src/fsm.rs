//! Agent controllers: the 3-bit memory, per-tick movement permissions and
//! the rule tables for the multi-column algorithm (`MultiLane`) and the
//! two-column algorithm (`TwoLane`).

use std::fmt;

use crate::grid::{Direction, Neighborhood, PositionClass, Reading};

/// Three bits of agent memory: a direction bit (MSB) and a mod-4 timer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AgentState(u8);

impl AgentState {
    pub const ZERO: AgentState = AgentState(0);

    pub fn new(dir: bool, timer: u8) -> AgentState {
        AgentState(((dir as u8) << 2) | (timer & 3))
    }

    pub fn from_bits(bits: u8) -> Option<AgentState> {
        (bits < 8).then_some(AgentState(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn dir(self) -> bool {
        self.0 & 4 != 0
    }

    pub fn timer(self) -> u8 {
        self.0 & 3
    }

    pub fn with_dir(self, dir: bool) -> AgentState {
        AgentState::new(dir, self.timer())
    }

    /// Advances the timer by one, keeping the direction bit.
    pub fn tick(self) -> AgentState {
        AgentState::new(self.dir(), (self.timer() + 1) & 3)
    }
}

impl fmt::Display for AgentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Exiting,
    Continue,
}

impl AgentKind {
    pub const ALL: [AgentKind; 2] = [AgentKind::Exiting, AgentKind::Continue];

    fn index(self) -> usize {
        match self {
            AgentKind::Exiting => 0,
            AgentKind::Continue => 1,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Exiting => "Exiting",
            AgentKind::Continue => "Continue",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Any width `m >= 3`.
    MultiLane,
    /// Exactly two columns.
    TwoLane,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::MultiLane => "A",
            Variant::TwoLane => "A2",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "A" | "a" | "multilane" | "MultiLane" => Some(Variant::MultiLane),
            "A2" | "a2" | "twolane" | "TwoLane" => Some(Variant::TwoLane),
            _ => None,
        }
    }

    pub fn supports_width(self, m: usize) -> bool {
        match self {
            Variant::MultiLane => m >= 3,
            Variant::TwoLane => m == 2,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Stay,
    Move(Direction),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Stay => f.write_str("Stay"),
            Action::Move(d) => write!(f, "Move{}", d.letter()),
        }
    }
}

/// Result of one rule lookup: what to do and the memory after the tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub action: Action,
    pub next: AgentState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleKey {
    pub kind: AgentKind,
    pub state: AgentState,
    pub position: PositionClass,
    pub neighborhood: Neighborhood,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no rule for {kind} in state {state} at position {position:?} reading {neighborhood:?}")]
pub struct UndefinedInput {
    pub kind: AgentKind,
    pub state: AgentState,
    pub position: PositionClass,
    pub neighborhood: Neighborhood,
}

/// A tiny set of directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DirSet(u8);

impl DirSet {
    pub const EMPTY: DirSet = DirSet(0);

    pub fn of(dirs: &[Direction]) -> DirSet {
        dirs.iter().fold(DirSet::EMPTY, |s, &d| s.with(d))
    }

    pub fn with(self, d: Direction) -> DirSet {
        DirSet(self.0 | 1 << d.index())
    }

    pub fn without(self, d: Direction) -> DirSet {
        DirSet(self.0 & !(1 << d.index()))
    }

    pub fn contains(self, d: Direction) -> bool {
        self.0 & (1 << d.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        Direction::ALL.into_iter().filter(move |&d| self.contains(d))
    }
}

/// Directions an agent may move in at `tick` (0..=3), never toward a border.
pub fn allowed_directions(v: Variant, k: AgentKind, p: PositionClass, tick: u8) -> DirSet {
    use Direction::*;
    let t = tick & 3;
    let mut s = DirSet::EMPTY;
    match v {
        Variant::MultiLane => {
            if t == 0 || t == 2 || p.is_last_col() {
                s = s.with(South);
            }
            if t == 1 || (k == AgentKind::Exiting && p.is_first_col() && t != 3) {
                s = s.with(North);
            }
            if t == 3 || (t == 1 && p.is_last_row()) {
                s = s.with(West);
            }
            if p.is_first_row() && t != 1 {
                s = s.with(East);
            }
        }
        Variant::TwoLane => {
            let first = p.is_first_col();
            match (first, t) {
                (true, 0) => s = s.with(North),
                (true, 1) => s = s.with(South),
                (false, 2) => s = s.with(South),
                (false, 3) => s = s.with(North),
                _ => {}
            }
            if first && t <= 1 && k == AgentKind::Exiting {
                s = s.with(East);
            }
            if !first && t >= 2 && k == AgentKind::Continue {
                s = s.with(West);
            }
        }
    }
    for d in Direction::ALL {
        if p.has_border(d) {
            s = s.without(d);
        }
    }
    s
}

const STATES: usize = 8;
const POSITIONS: usize = 9;
const CODES: usize = 256;
const TABLE_LEN: usize = 2 * STATES * POSITIONS * CODES;

/// Dense lookup table for one variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable {
    variant: Variant,
    entries: Vec<Option<Outcome>>,
}

fn slot(kind: AgentKind, state: AgentState, position: PositionClass, code: u8) -> usize {
    ((kind.index() * STATES + state.bits() as usize) * POSITIONS + position.index() as usize - 1)
        * CODES
        + code as usize
}

impl RuleTable {
    /// Builds the complete table for `v` from its rule function.
    pub fn build(v: Variant) -> RuleTable {
        let rule = match v {
            Variant::MultiLane => multilane_rule,
            Variant::TwoLane => twolane_rule,
        };
        let mut entries = vec![None; TABLE_LEN];
        for kind in AgentKind::ALL {
            for bits in 0..8 {
                let state = AgentState(bits);
                for position in PositionClass::ALL {
                    for nb in Neighborhood::all_for(position) {
                        entries[slot(kind, state, position, nb.code())] =
                            Some(rule(kind, state, position, nb));
                    }
                }
            }
        }
        RuleTable { variant: v, entries }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn lookup(&self, key: &RuleKey) -> Result<Outcome, UndefinedInput> {
        self.lookup_raw(key.kind, key.state, key.position, key.neighborhood.code())
            .ok_or(UndefinedInput {
                kind: key.kind,
                state: key.state,
                position: key.position,
                neighborhood: key.neighborhood,
            })
    }

    #[inline]
    pub fn lookup_raw(
        &self,
        kind: AgentKind,
        state: AgentState,
        position: PositionClass,
        code: u8,
    ) -> Option<Outcome> {
        self.entries[slot(kind, state, position, code)]
    }

    /// Replaces one entry; `None` removes it. Used for fault injection.
    pub fn set_entry(&mut self, key: &RuleKey, outcome: Option<Outcome>) {
        self.entries[slot(key.kind, key.state, key.position, key.neighborhood.code())] = outcome;
    }

    /// Every defined entry in deterministic order.
    pub fn entries(&self) -> impl Iterator<Item = (RuleKey, Outcome)> + '_ {
        AgentKind::ALL.into_iter().flat_map(move |kind| {
            (0..8u8).flat_map(move |bits| {
                PositionClass::ALL.into_iter().flat_map(move |position| {
                    Neighborhood::all_for(position).into_iter().filter_map(move |nb| {
                        let state = AgentState(bits);
                        self.lookup_raw(kind, state, position, nb.code()).map(|o| {
                            (
                                RuleKey {
                                    kind,
                                    state,
                                    position,
                                    neighborhood: nb,
                                },
                                o,
                            )
                        })
                    })
                })
            })
        })
    }

    /// A broken table in which exiting agents in the exit lane step West
    /// whenever they can.
    pub fn corrupted(v: Variant) -> RuleTable {
        let mut t = RuleTable::build(v);
        let keys: Vec<RuleKey> = t
            .entries()
            .filter(|(k, _)| {
                k.kind == AgentKind::Exiting
                    && k.position.is_last_col()
                    && k.neighborhood.west == Reading::Empty
            })
            .map(|(k, _)| k)
            .collect();
        for k in keys {
            t.set_entry(
                &k,
                Some(Outcome {
                    action: Action::Move(Direction::West),
                    next: k.state.tick(),
                }),
            );
        }
        t
    }

    /// CSV dump: `variant,kind,state,position,N,E,S,W,action,next_state`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,kind,state,position,N,E,S,W,action,next_state\n");
        for (k, o) in self.entries() {
            let nb = k.neighborhood;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.variant,
                k.kind,
                k.state,
                k.position.index(),
                nb.north.letter(),
                nb.east.letter(),
                nb.south.letter(),
                nb.west.letter(),
                o.action,
                o.next
            ));
        }
        out
    }
}

fn stay(s: AgentState, dir: bool) -> Outcome {
    Outcome {
        action: Action::Stay,
        next: s.with_dir(dir).tick(),
    }
}

fn go(s: AgentState, d: Direction, dir: bool) -> Outcome {
    Outcome {
        action: Action::Move(d),
        next: s.with_dir(dir).tick(),
    }
}

/// Multi-column rules. `dir = 1` means heading North, `0` heading South.
///
/// Clock: continue agents go South at tick 0, exiting agents at tick 2;
/// everyone goes North at 1 and West at 3. The first row moves East at
/// 0, 2 and 3, the last column moves South at every tick, and the last
/// row may also move West at tick 1.
fn multilane_rule(kind: AgentKind, s: AgentState, p: PositionClass, nb: Neighborhood) -> Outcome {
    use AgentKind::*;
    use Direction::*;
    use PositionClass::*;
    let t = s.timer();
    let d = s.dir();
    let free = |x: Direction| nb.is_empty(x);
    let east_tick = t != 1;
    match p {
        NwCorner => {
            if east_tick && free(East) {
                go(s, East, false)
            } else {
                stay(s, false)
            }
        }
        NorthEdge => {
            if kind == Continue && d && t == 2 && free(South) {
                go(s, South, false)
            } else if east_tick && free(East) {
                go(s, East, false)
            } else {
                stay(s, false)
            }
        }
        NeCorner => {
            if free(South) {
                go(s, South, false)
            } else {
                stay(s, false)
            }
        }
        EastEdge => {
            if free(South) {
                go(s, South, false)
            } else if kind == Continue && t == 3 && free(West) {
                go(s, West, false)
            } else {
                stay(s, false)
            }
        }
        SeCorner => {
            if kind == Continue && (t == 1 || t == 3) && free(West) {
                go(s, West, true)
            } else {
                stay(s, false)
            }
        }
        WestEdge | SwCorner => {
            let north_tick = t == 1 || (kind == Exiting && t != 3);
            if north_tick && free(North) {
                go(s, North, true)
            } else {
                stay(s, d)
            }
        }
        Interior => {
            let south_tick = if kind == Exiting { 2 } else { 0 };
            if kind == Exiting && t == 3 && free(West) {
                go(s, West, d)
            } else if t == 1 && d {
                if free(North) {
                    go(s, North, true)
                } else {
                    stay(s, false)
                }
            } else if t == south_tick && !d {
                if free(South) {
                    go(s, South, false)
                } else {
                    stay(s, true)
                }
            } else {
                stay(s, d)
            }
        }
        SouthEdge => match kind {
            Exiting => {
                if (t == 1 || t == 3) && free(West) {
                    go(s, West, true)
                } else if t == 1 && d && free(North) {
                    go(s, North, true)
                } else if t == 2 && !d {
                    stay(s, true)
                } else {
                    stay(s, d)
                }
            }
            Continue => {
                // dir = 1 on arrival from the East; an empty West cell first
                // clears it, and only a second sighting moves the agent.
                if !d && (t == 1 || t == 3) && free(West) {
                    go(s, West, true)
                } else if t == 1 && d && free(North) {
                    go(s, North, true)
                } else if d && free(West) && !free(North) {
                    stay(s, false)
                } else if t == 0 && !d && free(North) && !free(West) {
                    stay(s, true)
                } else {
                    stay(s, d)
                }
            }
        },
    }
}

/// Two-column rules. Column 1 acts at ticks 0 (North) and 1 (South),
/// column 2 at ticks 2 (South) and 3 (North). An agent in the wrong column
/// crosses over as soon as the side cell is free during its column's turn;
/// otherwise it walks along its column, reversing at its own tick when
/// blocked.
fn twolane_rule(kind: AgentKind, s: AgentState, p: PositionClass, nb: Neighborhood) -> Outcome {
    use AgentKind::*;
    use Direction::*;
    let t = s.timer();
    let d = s.dir();
    let free = |x: Direction| nb.is_empty(x);
    let first = p.is_first_col();
    let (north_tick, south_tick) = if first { (0, 1) } else { (3, 2) };
    if t != north_tick && t != south_tick {
        return stay(s, d);
    }
    if first && kind == Exiting && free(East) {
        return go(s, East, d);
    }
    if !first && kind == Continue && free(West) {
        return go(s, West, d);
    }
    if t == north_tick && d {
        if !p.has_border(North) && free(North) {
            go(s, North, true)
        } else {
            stay(s, false)
        }
    } else if t == south_tick && !d {
        if !p.has_border(South) && free(South) {
            go(s, South, false)
        } else {
            stay(s, true)
        }
    } else {
        stay(s, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Reading::*;

    fn nb(n: Reading, e: Reading, s: Reading, w: Reading) -> Neighborhood {
        Neighborhood::new(n, e, s, w)
    }

    #[test]
    fn timer_wraps() {
        assert_eq!(AgentState::new(false, 3).tick(), AgentState::new(false, 0));
        assert_eq!(AgentState::new(true, 1).tick(), AgentState::new(true, 2));
        let s = AgentState::new(true, 2);
        assert_eq!(s.tick().tick().tick().tick(), s);
    }

    #[test]
    fn state_encoding() {
        let s = AgentState::from_bits(0b110).unwrap();
        assert!(s.dir());
        assert_eq!(s.timer(), 2);
        for b in 0..8 {
            let s = AgentState::from_bits(b).unwrap();
            assert_eq!(AgentState::new(s.dir(), s.timer()).bits(), b);
        }
        assert!(AgentState::from_bits(8).is_none());
    }

    #[test]
    fn allowed_direction_examples() {
        use Direction::*;
        let a = Variant::MultiLane;
        assert_eq!(
            allowed_directions(a, AgentKind::Continue, PositionClass::Interior, 1),
            DirSet::of(&[North])
        );
        assert!(allowed_directions(a, AgentKind::Exiting, PositionClass::EastEdge, 0).contains(South));
        for t in 0..4 {
            assert!(!allowed_directions(Variant::TwoLane, AgentKind::Exiting, PositionClass::WestEdge, 2)
                .contains(East));
            for p in PositionClass::ALL {
                let s = allowed_directions(Variant::TwoLane, AgentKind::Exiting, p, 2);
                assert!(!s.contains(East));
                for k in AgentKind::ALL {
                    let s = allowed_directions(a, k, p, t);
                    for d in Direction::ALL {
                        if p.has_border(d) {
                            assert!(!s.contains(d));
                        }
                    }
                }
            }
        }
        assert!(allowed_directions(a, AgentKind::Exiting, PositionClass::WestEdge, 0).contains(North));
        assert!(!allowed_directions(a, AgentKind::Continue, PositionClass::WestEdge, 0).contains(North));
    }

    #[test]
    fn rule_examples() {
        let table = RuleTable::build(Variant::MultiLane);
        let key = RuleKey {
            kind: AgentKind::Continue,
            state: AgentState::from_bits(0b101).unwrap(),
            position: PositionClass::Interior,
            neighborhood: nb(Empty, Agent, Agent, Agent),
        };
        let o = table.lookup(&key).unwrap();
        assert_eq!(o.action, Action::Move(Direction::North));
        assert!(o.next.dir());

        for n in Neighborhood::all_for(PositionClass::NorthEdge) {
            if n.south != Empty {
                continue;
            }
            let key = RuleKey {
                kind: AgentKind::Continue,
                state: AgentState::from_bits(0b110).unwrap(),
                position: PositionClass::NorthEdge,
                neighborhood: n,
            };
            assert_eq!(table.lookup(&key).unwrap().action, Action::Move(Direction::South));
        }

        for (k, o) in table.entries() {
            if k.kind == AgentKind::Exiting && k.position == PositionClass::EastEdge {
                assert_ne!(o.action, Action::Move(Direction::West));
            }
        }
    }

    #[test]
    fn malformed_keys_are_undefined() {
        let table = RuleTable::build(Variant::MultiLane);
        let key = RuleKey {
            kind: AgentKind::Exiting,
            state: AgentState::ZERO,
            position: PositionClass::Interior,
            neighborhood: nb(Border, Empty, Empty, Empty),
        };
        assert!(table.lookup(&key).is_err());
    }

    fn structural_checks(v: Variant) {
        let table = RuleTable::build(v);
        let mut count = 0;
        for (k, o) in table.entries() {
            count += 1;
            assert_eq!(o.next.timer(), (k.state.timer() + 1) & 3, "{k:?}");
            if let Action::Move(d) = o.action {
                assert_eq!(k.neighborhood.get(d), Empty, "{k:?}");
                assert!(
                    allowed_directions(v, k.kind, k.position, k.state.timer()).contains(d),
                    "{k:?} -> {d}"
                );
                if k.kind == AgentKind::Exiting && k.position.is_last_col() {
                    assert!(matches!(d, Direction::South | Direction::North), "{k:?}");
                }
                if v == Variant::MultiLane {
                    if d == Direction::East {
                        assert!(k.position.is_first_row());
                    }
                    if k.position.is_first_col() && !k.position.is_first_row() {
                        assert_eq!(d, Direction::North);
                    }
                } else {
                    if d == Direction::East {
                        assert_eq!(k.kind, AgentKind::Exiting);
                    }
                    if d == Direction::West {
                        assert_eq!(k.kind, AgentKind::Continue);
                    }
                }
            }
            assert_eq!(table.lookup(&k), Ok(o));
        }
        // 2 kinds x 8 states x sum over classes of 2^(open sides).
        assert_eq!(count, 2 * 8 * (4 * 4 + 4 * 8 + 16));
    }

    #[test]
    fn multilane_structure() {
        structural_checks(Variant::MultiLane);
    }

    #[test]
    fn twolane_structure() {
        structural_checks(Variant::TwoLane);
    }

    #[test]
    fn rush_west_in_one_cycle() {
        // An interior exiting agent with a free West cell leaves at tick 3
        // whatever its memory, and no earlier tick moves it elsewhere
        // while West stays free and N/S are blocked.
        let table = RuleTable::build(Variant::MultiLane);
        for bits in 0..8 {
            let s = AgentState::from_bits(bits).unwrap();
            let key = RuleKey {
                kind: AgentKind::Exiting,
                state: s.with_dir(s.dir()),
                position: PositionClass::Interior,
                neighborhood: nb(Agent, Agent, Agent, Empty),
            };
            let o = table.lookup(&key).unwrap();
            if s.timer() == 3 {
                assert_eq!(o.action, Action::Move(Direction::West));
            } else {
                assert_eq!(o.action, Action::Stay);
            }
        }
    }

    /// Checks that no two moves emitted at the same tick can land on the
    /// same cell, over every cell of a range of grid shapes.
    fn no_structural_conflicts(v: Variant, shapes: &[(usize, usize)]) {
        let table = RuleTable::build(v);
        for t in 0..4u8 {
            // (position, direction) pairs that some entry emits at tick t.
            let mut emitted = std::collections::HashSet::new();
            for (k, o) in table.entries() {
                if k.state.timer() == t {
                    if let Action::Move(d) = o.action {
                        emitted.insert((k.position, d));
                    }
                }
            }
            for &(n, m) in shapes {
                for row in 1..=n {
                    for col in 1..=m {
                        let target = crate::grid::Coord::new(row, col);
                        let g = crate::grid::Grid::filled(n, m, crate::grid::Cell::Empty).unwrap();
                        let mut incoming = Vec::new();
                        for d in Direction::ALL {
                            if let Some(src) = g.neighbor(target, d) {
                                let p = g.position_class(src).unwrap();
                                if emitted.contains(&(p, d.opposite())) {
                                    incoming.push((src, d.opposite()));
                                }
                            }
                        }
                        assert!(
                            incoming.len() <= 1,
                            "{v} tick {t}: {n}x{m} cell {target} reachable from {incoming:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn multilane_collision_free_by_construction() {
        let shapes: Vec<_> = (2..=6).flat_map(|n| (3..=6).map(move |m| (n, m))).collect();
        no_structural_conflicts(Variant::MultiLane, &shapes);
    }

    #[test]
    fn twolane_collision_free_by_construction() {
        let shapes: Vec<_> = (2..=8).map(|n| (n, 2)).collect();
        no_structural_conflicts(Variant::TwoLane, &shapes);
    }

    #[test]
    fn corrupted_table_differs() {
        let good = RuleTable::build(Variant::MultiLane);
        let bad = RuleTable::corrupted(Variant::MultiLane);
        assert_ne!(good, bad);
        assert!(bad.entries().any(|(k, o)| k.kind == AgentKind::Exiting
            && k.position.is_last_col()
            && o.action == Action::Move(Direction::West)));
    }

    #[test]
    fn csv_dump_shape() {
        let csv = RuleTable::build(Variant::TwoLane).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "variant,kind,state,position,N,E,S,W,action,next_state");
        assert!(lines.all(|l| l.split(',').count() == 10));
    }
}
