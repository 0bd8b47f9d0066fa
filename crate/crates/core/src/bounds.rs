//! Closed-form running-time bounds as exact rationals.

use num_rational::Ratio;
use thiserror::Error;

pub type Q = Ratio<u64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("grid {n}x{m} too small (need n >= {min_n}, m >= {min_m})")]
    TooSmall {
        n: u64,
        m: u64,
        min_n: u64,
        min_m: u64,
    },
    #[error("N0 must be positive")]
    NoEmptyCell,
    #[error("N0 + N1 = {total} exceeds the {cells} cells")]
    Overfull { total: u64, cells: u64 },
    #[error("rho must lie strictly between 0 and 1, got {0}")]
    RhoOutOfRange(Q),
}

/// An `(n, m, N0, N1)` instance, optionally tagged with its empty ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemParams {
    pub n: u64,
    pub m: u64,
    pub n0: u64,
    pub n1: u64,
    pub rho: Option<Q>,
}

impl ProblemParams {
    pub fn new(n: u64, m: u64, n0: u64, n1: u64) -> ProblemParams {
        ProblemParams {
            n,
            m,
            n0,
            n1,
            rho: None,
        }
    }

    pub fn check(&self) -> Result<(), BoundsError> {
        if self.n0 == 0 {
            return Err(BoundsError::NoEmptyCell);
        }
        let cells = self.n * self.m;
        if self.n0 + self.n1 > cells {
            return Err(BoundsError::Overfull {
                total: self.n0 + self.n1,
                cells,
            });
        }
        Ok(())
    }
}

fn need(n: u64, m: u64, min_n: u64, min_m: u64) -> Result<(), BoundsError> {
    if n < min_n || m < min_m {
        Err(BoundsError::TooSmall { n, m, min_n, min_m })
    } else {
        Ok(())
    }
}

/// Worst case for one empty cell and one exiting agent: `16 m^2 n + 8 m n^2`.
pub fn worst_case_single(n: u64, m: u64) -> Result<u64, BoundsError> {
    need(n, m, 2, 3)?;
    Ok(16 * m * m * n + 8 * m * n * n)
}

/// `(3m + n + 2 N1) / N0 * 8mn`.
pub fn upper_bound_ticks(p: &ProblemParams) -> Result<Q, BoundsError> {
    p.check()?;
    Ok(Q::new((3 * p.m + p.n + 2 * p.n1) * 8 * p.m * p.n, p.n0))
}

/// The same bound in expanded form: `(24 n m^2 + 8 m n^2 + 16 m n N1) / N0`.
pub fn upper_bound_ticks_expanded(p: &ProblemParams) -> Result<Q, BoundsError> {
    p.check()?;
    let (n, m) = (p.n, p.m);
    Ok(Q::new(24 * n * m * m + 8 * m * n * n + 16 * m * n * p.n1, p.n0))
}

/// Empty-space cycles needed with a single empty cell: `n + 3m + 2 N1`.
pub fn cycle_upper_bound(n: u64, m: u64, n1: u64) -> u64 {
    n + 3 * m + 2 * n1
}

/// Cycles to clear the internal columns: `2m + 3 N1`.
pub fn te_cycle_bound(m: u64, n1: u64) -> u64 {
    2 * m + 3 * n1
}

/// Per-group cycle totals over all starting cells of a single exiting agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AvgCaseSums {
    /// Agents already in the exit lane.
    pub group1: u64,
    /// First row.
    pub group2: u64,
    pub group3_optimistic: u64,
    pub group3_pessimistic: u64,
    /// First column below row 2.
    pub group4: u64,
    /// Westward leg of internal agents.
    pub group5_west: u64,
    /// `m - 2` copies of group 4.
    pub group5_rest: u64,
    pub group5: u64,
    /// `4 (3m + n) m n` ticks.
    pub average_bound: u64,
}

pub fn avg_case_cycle_sums(n: u64, m: u64) -> Result<AvgCaseSums, BoundsError> {
    need(n, m, 3, 3)?;
    let group4 = (m - 1) * (n - 2) + n * (n - 1) / 2 - 1;
    let group5_west = (n - 2) * ((m - 1) * (m - 2) / 2);
    let group5_rest = (m - 2) * group4;
    Ok(AvgCaseSums {
        group1: 0,
        group2: m * (m - 1) / 2,
        group3_optimistic: (m - 1) * (m + 2) / 2,
        group3_pessimistic: (m - 1) * (m + 4) / 2 + (m - 3),
        group4,
        group5_west,
        group5_rest,
        group5: group5_west + group5_rest,
        average_bound: 4 * (3 * m + n) * m * n,
    })
}

/// Fraction of non-exit-lane cells in the bottom half: `(m - 1) / 2m`.
pub fn bottom_half_probability(m: u64) -> Result<Q, BoundsError> {
    need(2, m, 2, 2)?;
    Ok(Q::new(m - 1, 2 * m))
}

/// Bound with a constant empty ratio: `8 / rho * (3m + n + 2 N1)`.
pub fn rho_bound(n: u64, m: u64, n1: u64, rho: Q) -> Result<Q, BoundsError> {
    if rho == Q::from_integer(0) || rho >= Q::from_integer(1) {
        return Err(BoundsError::RhoOutOfRange(rho));
    }
    Ok(Q::from_integer(8 * (3 * m + n + 2 * n1)) / rho)
}

/// Two-column bounds: worst case `16 n^2` and mean `4 n N1 / N0`.
pub fn twolane_bounds(n: u64, n0: u64, n1: u64) -> Result<(u64, Q), BoundsError> {
    if n0 == 0 {
        return Err(BoundsError::NoEmptyCell);
    }
    Ok((16 * n * n, Q::new(4 * n * n1, n0)))
}

/// Rounds a rational bound up to whole ticks.
pub fn ceil_ticks(q: Q) -> u64 {
    q.ceil().to_integer()
}
