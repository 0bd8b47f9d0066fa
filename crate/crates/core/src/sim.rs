//! Synchronous tick loop, traces and trace checks.
//!
//! Every tick all agents read the frozen grid, look up their rule and then
//! move at once. A mover may only enter a cell that was empty before the
//! tick, and two movers aiming at the same cell is a fault.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bounds::{self, ProblemParams};
use crate::fsm::{allowed_directions, Action, AgentKind, AgentState, RuleTable, UndefinedInput, Variant};
use crate::grid::{Cell, Constraint, Coord, Direction, Grid, GridError, PositionClass, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    TargetReached,
    TickCapExceeded,
    CollisionDetected,
    UndefinedRuleHit,
}

impl StopReason {
    pub fn token(self) -> &'static str {
        match self {
            StopReason::TargetReached => "TargetReached",
            StopReason::TickCapExceeded => "TickCapExceeded",
            StopReason::CollisionDetected => "CollisionDetected",
            StopReason::UndefinedRuleHit => "UndefinedRuleHit",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for StopReason {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "TargetReached" => Ok(StopReason::TargetReached),
            "TickCapExceeded" => Ok(StopReason::TickCapExceeded),
            "CollisionDetected" => Ok(StopReason::CollisionDetected),
            "UndefinedRuleHit" => Ok(StopReason::UndefinedRuleHit),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("collision at {cell} on tick {tick}")]
    Collision { tick: u64, cell: Coord },
    #[error("undefined rule at {cell} on tick {tick}: {input}")]
    Undefined {
        tick: u64,
        cell: Coord,
        input: UndefinedInput,
    },
}

impl Fault {
    pub fn reason(&self) -> StopReason {
        match self {
            Fault::Collision { .. } => StopReason::CollisionDetected,
            Fault::Undefined { .. } => StopReason::UndefinedRuleHit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("illegal configuration: {0:?}")]
    Illegal(Vec<Violation>),
    #[error("variant {variant} cannot run on {m} columns")]
    Width { variant: Variant, m: usize },
    #[error("state list does not match the occupied cells")]
    StateShape,
    #[error("agent timers are not synchronized")]
    MismatchedTimers,
    #[error("empty-space cycles need exactly one empty cell, found {0}")]
    NotSingleEmpty(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One applied move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub agent: u32,
    pub kind: AgentKind,
    pub from: Coord,
    pub to: Coord,
    pub dir: Direction,
}

/// Grid after a tick together with the moves that produced it. `time` is
/// the clock value at which the moves were decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub time: u64,
    pub grid: Grid,
    pub moves: Vec<MoveRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start_time: u64,
    pub initial: Grid,
    pub frames: Vec<Frame>,
    pub stop: Option<(StopReason, u64)>,
}

impl Trace {
    pub fn new(initial: Grid, start_time: u64) -> Trace {
        Trace {
            start_time,
            initial,
            frames: Vec::new(),
            stop: None,
        }
    }

    /// Snapshots `(time, grid)`, starting with the initial grid.
    pub fn snapshots(&self) -> impl Iterator<Item = (u64, &Grid)> {
        std::iter::once((self.start_time, &self.initial))
            .chain(self.frames.iter().map(|f| (f.time + 1, &f.grid)))
    }

    /// Text form: `tick <k>` blocks of grid rows, then `stop <reason> ticks <T>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, g) in self.snapshots() {
            out.push_str(&format!("tick {k}\n"));
            out.push_str(&g.body());
        }
        if let Some((reason, ticks)) = self.stop {
            out.push_str(&format!("stop {reason} ticks {ticks}\n"));
        }
        out
    }

    /// Keeps the first `ticks` frames.
    pub fn truncated(&self, ticks: usize) -> Trace {
        Trace {
            start_time: self.start_time,
            initial: self.initial.clone(),
            frames: self.frames.iter().take(ticks).cloned().collect(),
            stop: None,
        }
    }
}

/// A trace read back from text; carries grids only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceText {
    pub snapshots: Vec<(u64, Grid)>,
    pub stop: Option<(StopReason, u64)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceParseError {
    #[error("line {0}: expected `tick <k>` or `stop <reason> ticks <T>`")]
    BadLine(usize),
    #[error("line {0}: unknown stop reason {1:?}")]
    UnknownReason(usize, String),
    #[error("line {line}: {source}")]
    Grid { line: usize, source: GridError },
    #[error("content after the stop line")]
    TrailingContent,
}

pub fn parse_trace(text: &str) -> Result<TraceText, TraceParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut snapshots = Vec::new();
    let mut stop = None;
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if stop.is_some() {
            if line.is_empty() {
                i += 1;
                continue;
            }
            return Err(TraceParseError::TrailingContent);
        }
        let words: Vec<&str> = line.split(' ').collect();
        match words.as_slice() {
            ["tick", k] => {
                let k: u64 = k.parse().map_err(|_| TraceParseError::BadLine(i + 1))?;
                let start = i + 1;
                let mut end = start;
                while end < lines.len()
                    && !lines[end].starts_with("tick ")
                    && !lines[end].starts_with("stop ")
                {
                    end += 1;
                }
                let g = Grid::from_body(&lines[start..end])
                    .map_err(|source| TraceParseError::Grid { line: start + 1, source })?;
                snapshots.push((k, g));
                i = end;
            }
            ["stop", reason, "ticks", t] => {
                let r = reason
                    .parse::<StopReason>()
                    .map_err(|_| TraceParseError::UnknownReason(i + 1, reason.to_string()))?;
                let t: u64 = t.parse().map_err(|_| TraceParseError::BadLine(i + 1))?;
                stop = Some((r, t));
                i += 1;
            }
            [""] if snapshots.is_empty() => i += 1,
            _ => return Err(TraceParseError::BadLine(i + 1)),
        }
    }
    Ok(TraceText { snapshots, stop })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub stop: StopReason,
    pub ticks: u64,
    /// Returns of the single empty cell to the top-left corner; only when `N0 = 1`.
    pub cycles: Option<u64>,
    /// Largest East+West move count of any exiting agent.
    pub max_ew_moves: u32,
    pub fault: Option<Fault>,
    pub trace: Option<Trace>,
}

const BORDER: usize = usize::MAX;
const NO_AGENT: u32 = u32::MAX;

/// Mutable simulation state. Agent memory lives in per-cell arrays.
#[derive(Clone, Debug)]
pub struct SimState {
    grid: Grid,
    states: Vec<AgentState>,
    ids: Vec<u32>,
    time: u64,
    start_time: u64,
    kinds: Vec<AgentKind>,
    ew_moves: Vec<u32>,
    pos: Vec<PositionClass>,
    nbr: Vec<[usize; 4]>,
    claims: Vec<u64>,
    scratch: Vec<AgentState>,
    moves: Vec<MoveRecord>,
}

impl SimState {
    /// Canonical start: every memory bit zero.
    pub fn new(grid: Grid) -> SimState {
        let cells = grid.cells().len();
        SimState::with_states(grid, vec![AgentState::ZERO; cells]).expect("uniform zero memory")
    }

    /// Starts from explicit per-cell memory (entries for empty cells are
    /// ignored). All agents must share the same timer.
    pub fn with_states(grid: Grid, states: Vec<AgentState>) -> Result<SimState, SimError> {
        let cells = grid.cells().len();
        if states.len() != cells {
            return Err(SimError::StateShape);
        }
        let mut timer = None;
        for (c, s) in grid.cells().iter().zip(&states) {
            if !c.is_empty() {
                match timer {
                    None => timer = Some(s.timer()),
                    Some(t) if t != s.timer() => return Err(SimError::MismatchedTimers),
                    _ => {}
                }
            }
        }
        let (n, m) = (grid.rows(), grid.cols());
        let mut pos = Vec::with_capacity(cells);
        let mut nbr = Vec::with_capacity(cells);
        let mut ids = vec![NO_AGENT; cells];
        let mut kinds = Vec::new();
        for i in 0..cells {
            let c = grid.coord_of(i);
            pos.push(grid.position_class(c)?);
            nbr.push(Direction::ALL.map(|d| {
                grid.neighbor(c, d)
                    .map(|nc| (nc.row - 1) * m + nc.col - 1)
                    .unwrap_or(BORDER)
            }));
            match grid.cells()[i] {
                Cell::Empty => {}
                Cell::Exiting => {
                    ids[i] = kinds.len() as u32;
                    kinds.push(AgentKind::Exiting);
                }
                Cell::Continue => {
                    ids[i] = kinds.len() as u32;
                    kinds.push(AgentKind::Continue);
                }
            }
        }
        let start = timer.unwrap_or(0) as u64;
        let _ = n;
        Ok(SimState {
            ew_moves: vec![0; kinds.len()],
            grid,
            states,
            ids,
            time: start,
            start_time: start,
            kinds,
            pos,
            nbr,
            claims: vec![u64::MAX; cells],
            scratch: vec![AgentState::ZERO; cells],
            moves: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn elapsed(&self) -> u64 {
        self.time - self.start_time
    }

    /// Memory of the agent at `c`, if any.
    pub fn state_at(&self, c: Coord) -> Option<AgentState> {
        let i = self.grid.index_of(c).ok()?;
        (!self.grid.cells()[i].is_empty()).then(|| self.states[i])
    }

    pub fn agent_at(&self, c: Coord) -> Option<u32> {
        let i = self.grid.index_of(c).ok()?;
        (self.ids[i] != NO_AGENT).then(|| self.ids[i])
    }

    pub fn ew_moves(&self) -> &[u32] {
        &self.ew_moves
    }

    pub fn kinds(&self) -> &[AgentKind] {
        &self.kinds
    }

    /// Largest East+West count among exiting agents.
    pub fn max_exiting_ew(&self) -> u32 {
        self.kinds
            .iter()
            .zip(&self.ew_moves)
            .filter(|(k, _)| **k == AgentKind::Exiting)
            .map(|(_, &c)| c)
            .max()
            .unwrap_or(0)
    }

    /// Moves applied by the last successful tick.
    pub fn last_moves(&self) -> &[MoveRecord] {
        &self.moves
    }

    /// Advances one tick. On a fault the state is left unchanged.
    pub fn step(&mut self, table: &RuleTable) -> Result<&[MoveRecord], Fault> {
        let m = self.grid.cols();
        let cells = self.grid.cells();
        let stamp = self.time;
        self.moves.clear();
        for i in 0..cells.len() {
            let kind = match cells[i] {
                Cell::Empty => continue,
                Cell::Exiting => AgentKind::Exiting,
                Cell::Continue => AgentKind::Continue,
            };
            let mut code = 0u8;
            for (k, &j) in self.nbr[i].iter().enumerate() {
                let r = if j == BORDER {
                    2
                } else if cells[j].is_empty() {
                    0
                } else {
                    1
                };
                code |= r << (2 * k);
            }
            let state = self.states[i];
            let coord = Coord::new(i / m + 1, i % m + 1);
            let out = table
                .lookup_raw(kind, state, self.pos[i], code)
                .ok_or_else(|| Fault::Undefined {
                    tick: stamp,
                    cell: coord,
                    input: UndefinedInput {
                        kind,
                        state,
                        position: self.pos[i],
                        neighborhood: crate::grid::Neighborhood::from_code(code)
                            .expect("sensor codes are well formed"),
                    },
                })?;
            self.scratch[i] = out.next;
            if let Action::Move(d) = out.action {
                let j = self.nbr[i][d.index()];
                if j == BORDER {
                    return Err(Fault::Collision { tick: stamp, cell: coord });
                }
                let target = Coord::new(j / m + 1, j % m + 1);
                if !cells[j].is_empty() || self.claims[j] == stamp {
                    return Err(Fault::Collision { tick: stamp, cell: target });
                }
                self.claims[j] = stamp;
                self.moves.push(MoveRecord {
                    agent: self.ids[i],
                    kind,
                    from: coord,
                    to: target,
                    dir: d,
                });
            }
        }
        // Sources were occupied and targets empty before the tick, so no
        // cell is both; moves can be applied in any order.
        std::mem::swap(&mut self.states, &mut self.scratch);
        let cells = self.grid.cells_mut();
        for mv in &self.moves {
            let from = (mv.from.row - 1) * m + mv.from.col - 1;
            let to = (mv.to.row - 1) * m + mv.to.col - 1;
            cells[to] = cells[from];
            cells[from] = Cell::Empty;
            self.ids[to] = self.ids[from];
            self.ids[from] = NO_AGENT;
            self.states[to] = self.states[from];
            if matches!(mv.dir, Direction::East | Direction::West) {
                self.ew_moves[mv.agent as usize] += 1;
            }
        }
        self.time += 1;
        Ok(&self.moves)
    }
}

/// Constraint each variant expects of its inputs.
pub fn constraint_for(v: Variant) -> Constraint {
    match v {
        Variant::MultiLane => Constraint::C1,
        Variant::TwoLane => Constraint::TwoLane,
    }
}

/// The proven tick bound for `g` under `v`, rounded up.
pub fn proven_bound(g: &Grid, v: Variant) -> u64 {
    let c = g.counts();
    match v {
        Variant::MultiLane => bounds::ceil_ticks(
            bounds::upper_bound_ticks(&ProblemParams::new(
                g.rows() as u64,
                g.cols() as u64,
                c.empty.max(1) as u64,
                c.exiting as u64,
            ))
            .expect("validated grid"),
        ),
        Variant::TwoLane => 16 * (g.rows() as u64).pow(2),
    }
}

/// Twice the proven bound.
pub fn default_cap(g: &Grid, v: Variant) -> u64 {
    2 * proven_bound(g, v)
}

fn check_input(g: &Grid, v: Variant) -> Result<(), SimError> {
    if !v.supports_width(g.cols()) {
        return Err(SimError::Width {
            variant: v,
            m: g.cols(),
        });
    }
    let violations = g.validate(constraint_for(v));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SimError::Illegal(violations))
    }
}

/// Runs `g` from canonical memory with the shipped table for `v`.
pub fn run(g: &Grid, v: Variant, cap: u64, record_trace: bool) -> Result<RunResult, SimError> {
    check_input(g, v)?;
    let table = RuleTable::build(v);
    Ok(run_state(SimState::new(g.clone()), &table, cap, record_trace))
}

/// Runs `g` with an explicit table (used for fault injection).
pub fn run_with(
    g: &Grid,
    table: &RuleTable,
    cap: u64,
    record_trace: bool,
) -> Result<RunResult, SimError> {
    check_input(g, table.variant())?;
    Ok(run_state(SimState::new(g.clone()), table, cap, record_trace))
}

/// Runs a prepared state until the target, the cap, or a fault.
pub fn run_state(mut s: SimState, table: &RuleTable, cap: u64, record_trace: bool) -> RunResult {
    let constraint = constraint_for(table.variant());
    let single_empty = s.grid.counts().empty == 1;
    let mut cycles = 0u64;
    let mut trace = record_trace.then(|| Trace::new(s.grid.clone(), s.time));
    let mut fault = None;
    let stop = loop {
        if s.grid.is_target(constraint) {
            break StopReason::TargetReached;
        }
        if s.elapsed() >= cap {
            break StopReason::TickCapExceeded;
        }
        let corner_was_full = !s.grid.cells()[0].is_empty();
        let time = s.time;
        match s.step(table) {
            Ok(_) => {}
            Err(f) => {
                let r = f.reason();
                fault = Some(f);
                break r;
            }
        }
        if corner_was_full && s.grid.cells()[0].is_empty() {
            cycles += 1;
        }
        if let Some(t) = trace.as_mut() {
            t.frames.push(Frame {
                time,
                grid: s.grid.clone(),
                moves: s.moves.clone(),
            });
        }
    };
    let ticks = s.elapsed();
    if let Some(t) = trace.as_mut() {
        t.stop = Some((stop, ticks));
    }
    RunResult {
        stop,
        ticks,
        cycles: single_empty.then_some(cycles),
        max_ew_moves: s.max_exiting_ew(),
        fault,
        trace,
    }
}

/// Number of times the single empty cell arrives at the top-left corner.
pub fn empty_space_cycles(trace: &Trace) -> Result<u64, SimError> {
    let empties = trace.initial.counts().empty;
    if empties != 1 {
        return Err(SimError::NotSingleEmpty(empties));
    }
    let mut prev_full = !trace.initial.cells()[0].is_empty();
    let mut count = 0;
    for f in &trace.frames {
        let full = !f.grid.cells()[0].is_empty();
        if prev_full && !full {
            count += 1;
        }
        prev_full = full;
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceViolation {
    /// An exiting agent made more than `2m` East/West moves.
    TooManyEastWest { agent: u32, moves: u32 },
    /// An exiting agent left the exit lane.
    LeftExitLane { time: u64, mv: MoveRecord },
    EastOutsideFirstRow { time: u64, mv: MoveRecord },
    FirstColumnNotNorth { time: u64, mv: MoveRecord },
    /// A continue agent that entered row 1 from the interior did not step back.
    NoBounceBack { time: u64, mv: MoveRecord },
    /// A cell vacated by a North/South move was refilled the same way too soon.
    FastReturn { vacated: u64, refilled: u64, cell: Coord },
    WrongWayLaneChange { time: u64, mv: MoveRecord },
    DisallowedDirection { time: u64, mv: MoveRecord },
}

fn vertical(d: Direction) -> bool {
    matches!(d, Direction::North | Direction::South)
}

/// Checks a recorded trace against the behavioral rules of `v`.
pub fn check_trace_invariants(trace: &Trace, v: Variant) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    let (n, m) = (trace.initial.rows(), trace.initial.cols());
    let mut ew: HashMap<u32, u32> = HashMap::new();
    let mut vacated: HashMap<Coord, u64> = HashMap::new();
    for (fi, f) in trace.frames.iter().enumerate() {
        for mv in &f.moves {
            let p = crate::grid::position_class(n, m, mv.from).expect("trace coordinates");
            if !allowed_directions(v, mv.kind, p, (f.time & 3) as u8).contains(mv.dir) {
                out.push(TraceViolation::DisallowedDirection { time: f.time, mv: *mv });
            }
            let exiting = mv.kind == AgentKind::Exiting;
            if exiting && !vertical(mv.dir) {
                let c = ew.entry(mv.agent).or_default();
                *c += 1;
                if *c == 2 * m as u32 + 1 {
                    out.push(TraceViolation::TooManyEastWest {
                        agent: mv.agent,
                        moves: *c,
                    });
                }
            }
            if exiting && mv.from.col == m && mv.to.col != m {
                out.push(TraceViolation::LeftExitLane { time: f.time, mv: *mv });
            }
            match v {
                Variant::MultiLane => {
                    if mv.dir == Direction::East && mv.from.row != 1 {
                        out.push(TraceViolation::EastOutsideFirstRow { time: f.time, mv: *mv });
                    }
                    if mv.from.col == 1 && mv.dir != Direction::North && mv.from.row != 1 {
                        out.push(TraceViolation::FirstColumnNotNorth { time: f.time, mv: *mv });
                    }
                    if mv.kind == AgentKind::Continue
                        && mv.dir == Direction::North
                        && mv.to.row == 1
                        && mv.from.col > 1
                        && mv.from.col < m
                    {
                        let bounced = match trace.frames.get(fi + 1) {
                            None => true,
                            Some(next) => next.moves.iter().any(|b| {
                                b.agent == mv.agent && b.dir == Direction::South && b.from == mv.to
                            }),
                        };
                        if !bounced {
                            out.push(TraceViolation::NoBounceBack { time: f.time, mv: *mv });
                        }
                    }
                }
                Variant::TwoLane => {
                    let wrong = match mv.dir {
                        Direction::East => mv.kind != AgentKind::Exiting,
                        Direction::West => mv.kind != AgentKind::Continue,
                        _ => false,
                    };
                    if wrong {
                        out.push(TraceViolation::WrongWayLaneChange { time: f.time, mv: *mv });
                    }
                    if vertical(mv.dir) {
                        if let Some(&t0) = vacated.get(&mv.to) {
                            if f.time < t0 + 4 {
                                out.push(TraceViolation::FastReturn {
                                    vacated: t0,
                                    refilled: f.time,
                                    cell: mv.to,
                                });
                            }
                        }
                    }
                }
            }
        }
        if v == Variant::TwoLane {
            for mv in &f.moves {
                if vertical(mv.dir) {
                    vacated.insert(mv.from, f.time);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::parse_grid;

    fn g(s: &str) -> Grid {
        parse_grid(s).unwrap()
    }

    #[test]
    fn target_config_is_immediate() {
        let grid = g("2 3\nC.E\nCCC");
        let r = run(&grid, Variant::MultiLane, 100, true).unwrap();
        assert_eq!((r.stop, r.ticks), (StopReason::TargetReached, 0));
        assert!(r.trace.unwrap().frames.is_empty());
    }

    #[test]
    fn staying_agents_keep_grid() {
        // Nothing can move in a sorted full-but-one grid whose hole sits in
        // the exit lane bottom: only the timer changes.
        let table = RuleTable::build(Variant::MultiLane);
        let mut s = SimState::new(g("2 3\nCCE\nCC."));
        let before = s.grid().clone();
        let moves = s.step(&table).unwrap().to_vec();
        if moves.is_empty() {
            assert_eq!(s.grid(), &before);
        }
        assert_eq!(s.time(), 1);
        for c in [Coord::new(1, 1), Coord::new(2, 2)] {
            assert_eq!(s.state_at(c).unwrap().timer(), 1);
        }
    }

    /// t0 idle; t1 (2,1) climbs into the corner; t2 idle; t3 the bottom
    /// continue agent at (2,2) steps West.
    #[test]
    fn hand_stepped_two_by_three() {
        let table = RuleTable::build(Variant::MultiLane);
        let mut s = SimState::new(g("2 3\n.EC\nCCC"));
        assert!(s.step(&table).unwrap().is_empty());
        let m1 = s.step(&table).unwrap().to_vec();
        assert_eq!(m1.len(), 1);
        assert_eq!((m1[0].from, m1[0].to), (Coord::new(2, 1), Coord::new(1, 1)));
        assert!(s.step(&table).unwrap().is_empty());
        let m3 = s.step(&table).unwrap().to_vec();
        assert_eq!(m3.len(), 1);
        assert_eq!((m3[0].from, m3[0].to), (Coord::new(2, 2), Coord::new(2, 1)));
        assert_eq!(s.grid().body(), "CEC\nC.C\n");
    }

    #[test]
    fn flanked_empty_cell_no_collision() {
        // One empty cell flanked by agents on every side: at most one moves.
        let table = RuleTable::build(Variant::MultiLane);
        for start in 0..4 {
            let grid = g("3 3\nCCC\nE.C\nCEC");
            let states = vec![AgentState::new(start % 2 == 0, start as u8); 9];
            let mut s = SimState::with_states(grid, states).unwrap();
            for _ in 0..4 {
                let moves = s.step(&table).unwrap();
                assert!(moves.len() <= 2);
            }
        }
    }

    #[test]
    fn two_by_two_twolane() {
        let grid = g("2 2\n.C\nE.");
        let r = run(&grid, Variant::TwoLane, 64, true).unwrap();
        assert_eq!(r.stop, StopReason::TargetReached);
        // Tick 0: column 1 is active; the exiting agent sees East free.
        assert_eq!(r.ticks, 1);
        assert!(r.ticks <= 64);
    }

    #[test]
    fn illegal_inputs_rejected() {
        assert!(matches!(
            run(&g("2 2\n.C\nE."), Variant::MultiLane, 10, false),
            Err(SimError::Width { .. })
        ));
        assert!(matches!(
            run(&g("2 3\nEEC\nCC."), Variant::MultiLane, 10, false),
            Err(SimError::Illegal(_))
        ));
        let states = vec![AgentState::new(false, 0), AgentState::new(false, 1), AgentState::ZERO, AgentState::ZERO];
        assert_eq!(
            SimState::with_states(g("2 2\nCC\nC."), states).unwrap_err(),
            SimError::MismatchedTimers
        );
    }

    #[test]
    fn cycles_on_single_empty() {
        let grid = g("3 3\nCCC\nCCE\nCC.");
        let r = run(&grid, Variant::MultiLane, 2000, true).unwrap();
        let trace = r.trace.as_ref().unwrap();
        assert_eq!(r.cycles, Some(empty_space_cycles(trace).unwrap()));
        let two = g("2 3\n..E\nCCC");
        let r2 = run(&two, Variant::MultiLane, 100, true).unwrap();
        assert_eq!(r2.cycles, None);
        assert!(empty_space_cycles(r2.trace.as_ref().unwrap()).is_err());
    }

    #[test]
    fn corner_never_empties() {
        let t = Trace::new(g("2 3\nC.E\nCCC"), 0);
        assert_eq!(empty_space_cycles(&t), Ok(0));
        assert!(check_trace_invariants(&t, Variant::MultiLane).is_empty());
    }

    #[test]
    fn doctored_trace_flags_exit_lane_departure() {
        let mut t = Trace::new(g("2 3\nC.E\nCCC"), 0);
        t.frames.push(Frame {
            time: 3,
            grid: g("2 3\nCE.\nCCC"),
            moves: vec![MoveRecord {
                agent: 1,
                kind: AgentKind::Exiting,
                from: Coord::new(1, 3),
                to: Coord::new(1, 2),
                dir: Direction::West,
            }],
        });
        let v = check_trace_invariants(&t, Variant::MultiLane);
        assert!(v.iter().any(|x| matches!(x, TraceViolation::LeftExitLane { .. })));
    }

    #[test]
    fn trace_text_roundtrip() {
        let r = run(&g("3 3\nE.C\nCCC\nCC."), Variant::MultiLane, 500, true).unwrap();
        let trace = r.trace.unwrap();
        let text = trace.to_text();
        let back = parse_trace(&text).unwrap();
        assert_eq!(back.snapshots.len(), trace.frames.len() + 1);
        assert_eq!(back.stop, Some((r.stop, r.ticks)));
        for ((k, g1), (k2, g2)) in back.snapshots.iter().zip(trace.snapshots()) {
            assert_eq!((*k, g1), (k2, g2));
        }
        assert!(matches!(
            parse_trace("tick 0\nC.\nCE\nstop Done ticks 0\n"),
            Err(TraceParseError::UnknownReason(..))
        ));
        assert_eq!(parse_trace("").unwrap().snapshots.len(), 0);
    }

    #[test]
    fn determinism() {
        let grid = g("3 4\nE..C\nCCEC\nCCCC");
        let a = run(&grid, Variant::MultiLane, 5000, true).unwrap();
        let b = run(&grid, Variant::MultiLane, 5000, true).unwrap();
        assert_eq!(a, b);
    }
}
