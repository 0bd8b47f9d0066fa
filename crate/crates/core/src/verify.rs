//! Exhaustive small-grid verification.
//!
//! Every legal configuration of a tiny grid is run to completion with a
//! trace; the report collects anything that went wrong.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{self, Q};
use crate::fsm::{AgentState, RuleTable, Variant};
use crate::grid::{Cell, Constraint, Grid};
use crate::sim::{self, check_trace_invariants, RunResult, SimState, StopReason, TraceViolation};

/// Largest `n * m` enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 12;
/// Largest `n * m` for which every direction-bit assignment is tried.
pub const ROBUSTNESS_LIMIT: usize = 9;
/// Ticks of trace kept with each failure.
pub const REPLAY_TICKS: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("{n}x{m} has {} cells, above the exhaustive limit of {limit}", n * m)]
    TooLarge { n: usize, m: usize, limit: usize },
    #[error("variant {variant} cannot run on {m} columns")]
    Width { variant: Variant, m: usize },
    #[error("grid must be at least 2x2")]
    TooSmall,
}

/// Every configuration of an `n x m` grid satisfying `constraint`, in
/// base-3 counting order with cell `(1,1)` as the least significant digit
/// (`.` = 0, `E` = 1, `C` = 2).
pub fn enumerate_configs(
    n: usize,
    m: usize,
    constraint: Constraint,
) -> Result<impl Iterator<Item = Grid>, VerifyError> {
    guard(n, m, EXHAUSTIVE_LIMIT)?;
    let total = 3u64.pow((n * m) as u32);
    Ok((0..total).filter_map(move |code| decode(n, m, code, constraint)))
}

fn guard(n: usize, m: usize, limit: usize) -> Result<(), VerifyError> {
    if n < 2 || m < 2 {
        return Err(VerifyError::TooSmall);
    }
    if n * m > limit {
        return Err(VerifyError::TooLarge { n, m, limit });
    }
    Ok(())
}

fn decode(n: usize, m: usize, mut code: u64, constraint: Constraint) -> Option<Grid> {
    let mut cells = Vec::with_capacity(n * m);
    for _ in 0..n * m {
        cells.push(match code % 3 {
            0 => Cell::Empty,
            1 => Cell::Exiting,
            _ => Cell::Continue,
        });
        code /= 3;
    }
    let g = Grid::new(n, m, cells).ok()?;
    g.is_valid(constraint).then_some(g)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Stopped(StopReason),
    Invariant(TraceViolation),
    BoundExceeded { ticks: u64, bound: u64 },
    CycleBoundExceeded { cycles: u64, bound: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub config: Grid,
    /// Initial direction bits per cell when not all zero.
    pub dirs: Option<Vec<bool>>,
    pub kind: FailureKind,
    /// Trace text of the first few ticks.
    pub replay: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub grids_checked: u64,
    pub runs: u64,
    pub failures: Vec<Failure>,
    pub max_ticks_seen: u64,
    pub max_cycles_seen: Option<u64>,
    pub max_ew_seen: u32,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(mut self, other: VerifyReport) -> VerifyReport {
        self.grids_checked += other.grids_checked;
        self.runs += other.runs;
        self.failures.extend(other.failures);
        self.max_ticks_seen = self.max_ticks_seen.max(other.max_ticks_seen);
        self.max_cycles_seen = match (self.max_cycles_seen, other.max_cycles_seen) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.max_ew_seen = self.max_ew_seen.max(other.max_ew_seen);
        self
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "grids {} runs {} failures {} max_ticks {} max_ew {}",
            self.grids_checked,
            self.runs,
            self.failures.len(),
            self.max_ticks_seen,
            self.max_ew_seen
        );
        if let Some(c) = self.max_cycles_seen {
            s.push_str(&format!(" max_cycles {c}"));
        }
        s
    }

    /// Failing configurations as grid texts separated by blank lines.
    pub fn failures_text(&self) -> String {
        self.failures
            .iter()
            .map(|f| f.config.to_text())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn cap_for(g: &Grid, v: Variant, cap_factor: Q) -> u64 {
    bounds::ceil_ticks(cap_factor * Q::from_integer(sim::proven_bound(g, v)))
}

/// Runs one configuration and turns everything observed into a report.
fn check_one(g: &Grid, table: &RuleTable, dirs: Option<Vec<bool>>, cap_factor: Q) -> VerifyReport {
    let v = table.variant();
    let state = match &dirs {
        None => SimState::new(g.clone()),
        Some(d) => {
            let states = d.iter().map(|&b| AgentState::new(b, 0)).collect();
            SimState::with_states(g.clone(), states).expect("zero timers are synchronized")
        }
    };
    let bound = sim::proven_bound(g, v);
    let r: RunResult = sim::run_state(state, table, cap_for(g, v, cap_factor), true);
    let trace = r.trace.as_ref().expect("trace requested");
    let mut kinds = Vec::new();
    if r.stop != StopReason::TargetReached {
        kinds.push(FailureKind::Stopped(r.stop));
    }
    if r.ticks > bound {
        kinds.push(FailureKind::BoundExceeded { ticks: r.ticks, bound });
    }
    let counts = g.counts();
    if v == Variant::MultiLane && counts.empty == 1 && counts.exiting == 1 {
        let cycles = r.cycles.unwrap_or(0);
        let cb = bounds::cycle_upper_bound(g.rows() as u64, g.cols() as u64, 1);
        if cycles > cb {
            kinds.push(FailureKind::CycleBoundExceeded { cycles, bound: cb });
        }
    }
    kinds.extend(check_trace_invariants(trace, v).into_iter().map(FailureKind::Invariant));
    let replay = trace.truncated(REPLAY_TICKS).to_text();
    VerifyReport {
        grids_checked: 1,
        runs: 1,
        failures: kinds
            .into_iter()
            .map(|kind| Failure {
                config: g.clone(),
                dirs: dirs.clone(),
                kind,
                replay: replay.clone(),
            })
            .collect(),
        max_ticks_seen: r.ticks,
        max_cycles_seen: r.cycles,
        max_ew_seen: r.max_ew_moves,
    }
}

fn check_width(m: usize, v: Variant) -> Result<(), VerifyError> {
    if v.supports_width(m) {
        Ok(())
    } else {
        Err(VerifyError::Width { variant: v, m })
    }
}

/// Runs every legal configuration with `cap = cap_factor * bound`.
pub fn verify_all(n: usize, m: usize, v: Variant, cap_factor: Q) -> Result<VerifyReport, VerifyError> {
    verify_all_with(n, m, &RuleTable::build(v), cap_factor)
}

/// As [`verify_all`] with an explicit rule table.
pub fn verify_all_with(
    n: usize,
    m: usize,
    table: &RuleTable,
    cap_factor: Q,
) -> Result<VerifyReport, VerifyError> {
    let v = table.variant();
    check_width(m, v)?;
    guard(n, m, EXHAUSTIVE_LIMIT)?;
    let constraint = sim::constraint_for(v);
    let total = 3u64.pow((n * m) as u32);
    let report = (0..total)
        .into_par_iter()
        .filter_map(|code| decode(n, m, code, constraint))
        .map(|g| check_one(&g, table, None, cap_factor))
        .reduce(VerifyReport::default, VerifyReport::merge);
    Ok(report)
}

/// Runs every legal configuration under every assignment of initial
/// direction bits (timers all zero).
pub fn verify_memory_robustness(n: usize, m: usize, v: Variant) -> Result<VerifyReport, VerifyError> {
    check_width(m, v)?;
    guard(n, m, ROBUSTNESS_LIMIT)?;
    let table = RuleTable::build(v);
    let constraint = sim::constraint_for(v);
    let total = 3u64.pow((n * m) as u32);
    let two = Q::from_integer(2);
    let report = (0..total)
        .into_par_iter()
        .filter_map(|code| decode(n, m, code, constraint))
        .map(|g| {
            let occupied: Vec<usize> = (0..n * m).filter(|&i| !g.cells()[i].is_empty()).collect();
            let mut rep = VerifyReport::default();
            for mask in 0u32..(1 << occupied.len()) {
                let mut dirs = vec![false; n * m];
                for (b, &i) in occupied.iter().enumerate() {
                    dirs[i] = mask >> b & 1 == 1;
                }
                rep = rep.merge(check_one(&g, &table, Some(dirs), two));
            }
            rep.grids_checked = 1;
            rep
        })
        .reduce(VerifyReport::default, VerifyReport::merge);
    Ok(report)
}

/// Random legal configurations for grids too large to enumerate.
pub fn verify_sampled(
    n: usize,
    m: usize,
    v: Variant,
    samples: u64,
    seed: u64,
) -> Result<VerifyReport, VerifyError> {
    check_width(m, v)?;
    if n < 2 {
        return Err(VerifyError::TooSmall);
    }
    let table = RuleTable::build(v);
    let constraint = sim::constraint_for(v);
    let report = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::experiment::run_seed(seed, 0, i));
            loop {
                let cells = (0..n * m)
                    .map(|_| match rng.gen_range(0..3) {
                        0 => Cell::Empty,
                        1 => Cell::Exiting,
                        _ => Cell::Continue,
                    })
                    .collect();
                let g = Grid::new(n, m, cells).expect("shape");
                if g.is_valid(constraint) {
                    break check_one(&g, &table, None, Q::from_integer(2));
                }
            }
        })
        .reduce(VerifyReport::default, VerifyReport::merge);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent count: choose which cells are empty and which exiting.
    fn count_oracle(cells: u64, max_exiting: u64) -> u64 {
        fn choose(n: u64, k: u64) -> u64 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        let mut total = 0;
        for n0 in 1..=cells {
            for n1 in 0..=max_exiting.min(cells - n0) {
                total += choose(cells, n0) * choose(cells - n0, n1);
            }
        }
        total
    }

    #[test]
    fn enumeration_counts() {
        let c1: Vec<Grid> = enumerate_configs(2, 3, Constraint::C1).unwrap().collect();
        assert_eq!(c1.len() as u64, count_oracle(6, 1));
        assert_eq!(c1.len(), 249);
        let set: HashSet<_> = c1.iter().cloned().collect();
        assert_eq!(set.len(), c1.len());
        assert!(c1.iter().all(|g| g.is_valid(Constraint::C1)));

        let two: Vec<Grid> = enumerate_configs(3, 2, Constraint::TwoLane).unwrap().collect();
        assert_eq!(two.len() as u64, 3u64.pow(6) - 2u64.pow(6));
        assert_eq!(
            enumerate_configs(3, 3, Constraint::C1).unwrap().count() as u64,
            count_oracle(9, 2)
        );
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_configs(4, 4, Constraint::C1),
            Err(VerifyError::TooLarge { .. })
        ));
    }

    #[test]
    fn small_multilane_passes() {
        let r = verify_all(2, 3, Variant::MultiLane, Q::from_integer(2)).unwrap();
        assert!(r.ok(), "{:#?}", r.failures.first());
        assert_eq!(r.grids_checked, 249);
    }

    #[test]
    fn small_twolane_passes() {
        let r = verify_all(3, 2, Variant::TwoLane, Q::from_integer(1)).unwrap();
        assert!(r.ok(), "{:#?}", r.failures.first());
    }

    #[test]
    fn corrupted_table_is_caught() {
        // 3x3 admits two exiting agents, so one can sit in the exit lane
        // while the run is still going.
        let bad = RuleTable::corrupted(Variant::MultiLane);
        let r = verify_all_with(3, 3, &bad, Q::from_integer(2)).unwrap();
        assert!(!r.ok());
        assert!(!r.failures[0].replay.is_empty());
    }

    #[test]
    fn robustness_all_dirs_set() {
        let g: Grid = "2 3\nE.C\nCCC".parse().unwrap();
        let table = RuleTable::build(Variant::MultiLane);
        let r = check_one(&g, &table, Some(vec![true; 6]), Q::from_integer(2));
        assert!(r.ok(), "{:?}", r.failures);
    }

    #[test]
    fn robustness_small() {
        let r = verify_memory_robustness(2, 3, Variant::MultiLane).unwrap();
        assert!(r.ok(), "{:#?}", r.failures.first());
        assert!(r.runs > r.grids_checked);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = VerifyReport {
            grids_checked: 2,
            runs: 2,
            max_ticks_seen: 5,
            max_cycles_seen: Some(3),
            ..Default::default()
        };
        let b = VerifyReport {
            grids_checked: 1,
            runs: 4,
            max_ticks_seen: 9,
            max_ew_seen: 2,
            ..Default::default()
        };
        assert_eq!(a.clone().merge(b.clone()), b.merge(a));
    }
}
