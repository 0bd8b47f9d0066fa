//! Anonymous agents with three bits of memory sort "exiting" vehicles into
//! the rightmost lane of an `n x m` road segment, using only synchronized
//! local moves.
//!
//! * [`grid`]: configurations, position classes, sensing, text format.
//! * [`fsm`]: agent memory and the rule tables of both algorithms.
//! * [`sim`]: the tick engine, traces and trace checks.
//! * [`verify`]: exhaustive checks on tiny grids.
//! * [`ballbox`]: the ball-and-box clearing model.
//! * [`bounds`]: closed-form time bounds as exact rationals.
//! * [`experiment`]: seeded sweeps, fits and CSV output.
//! * [`cli`]: the `exitroad` command.

pub mod ballbox;
pub mod bounds;
pub mod cli;
pub mod experiment;
pub mod fsm;
pub mod grid;
pub mod sim;
pub mod verify;

pub use fsm::{AgentKind, AgentState, RuleTable, Variant};
pub use grid::{parse_grid, Cell, Constraint, Coord, Direction, Grid, PositionClass};
pub use sim::{run, RunResult, SimState, StopReason};
