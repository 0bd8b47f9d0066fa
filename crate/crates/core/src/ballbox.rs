//! Ball-and-box model used to bound clearing time.
//!
//! Boxes `1..=M` feed a sink at `0`. Under BMP1 every non-empty box hands
//! one ball to the box below on each tick. BMP2 couples a labelled
//! configuration to the all-in-box-`M` run: ball `L` leaves box `k` exactly
//! when it would in that run, at tick `L + M - k`.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BallBoxError {
    #[error("box {k} is outside 0..={m}")]
    BoxOutOfRange { k: usize, m: usize },
    #[error("labels are not a permutation of 1..={0}")]
    NotPermutation(usize),
    #[error("box {lower} holds label {high} above label {low} in higher box {upper}")]
    InconsistentLabels {
        lower: usize,
        upper: usize,
        low: u32,
        high: u32,
    },
    #[error("malformed occupancy pair {0:?}")]
    BadPair(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallBoxState {
    m: usize,
    occupancy: Vec<u64>,
    labels: Option<Vec<Vec<u32>>>,
}

impl BallBoxState {
    /// `M` boxes plus the sink, all empty.
    pub fn empty(m: usize) -> BallBoxState {
        BallBoxState {
            m,
            occupancy: vec![0; m + 1],
            labels: None,
        }
    }

    /// From `(box, count)` pairs; repeated boxes accumulate.
    pub fn from_pairs(m: usize, pairs: &[(usize, u64)]) -> Result<BallBoxState, BallBoxError> {
        let mut s = BallBoxState::empty(m);
        for &(k, c) in pairs {
            if k > m {
                return Err(BallBoxError::BoxOutOfRange { k, m });
            }
            s.occupancy[k] += c;
        }
        Ok(s)
    }

    pub fn from_occupancy(occupancy: Vec<u64>) -> BallBoxState {
        assert!(!occupancy.is_empty(), "the sink box always exists");
        BallBoxState {
            m: occupancy.len() - 1,
            occupancy,
            labels: None,
        }
    }

    /// Explicit labels per box; checked for the ordering rule.
    pub fn with_labels(m: usize, boxes: Vec<Vec<u32>>) -> Result<BallBoxState, BallBoxError> {
        if boxes.len() != m + 1 {
            return Err(BallBoxError::BoxOutOfRange { k: boxes.len().saturating_sub(1), m });
        }
        let total: usize = boxes.iter().map(Vec::len).sum();
        let mut all: Vec<u32> = boxes.iter().flatten().copied().collect();
        all.sort_unstable();
        if all.iter().enumerate().any(|(i, &l)| l != i as u32 + 1) {
            return Err(BallBoxError::NotPermutation(total));
        }
        let mut prev: Option<(usize, u32)> = None;
        for (k, b) in boxes.iter().enumerate() {
            if let (Some(&lo), Some(&hi)) = (b.iter().min(), b.iter().max()) {
                if let Some((pk, pmax)) = prev {
                    if pmax > lo {
                        return Err(BallBoxError::InconsistentLabels {
                            lower: pk,
                            upper: k,
                            low: lo,
                            high: pmax,
                        });
                    }
                }
                prev = Some((k, hi));
            }
        }
        Ok(BallBoxState {
            m,
            occupancy: boxes.iter().map(|b| b.len() as u64).collect(),
            labels: Some(boxes),
        })
    }

    /// Labels `1..=N` from the sink upward.
    pub fn canonical_labels(&self) -> Vec<Vec<u32>> {
        let mut next = 1u32;
        self.occupancy
            .iter()
            .map(|&c| {
                let v: Vec<u32> = (next..next + c as u32).collect();
                next += c as u32;
                v
            })
            .collect()
    }

    pub fn boxes(&self) -> usize {
        self.m
    }

    pub fn occupancy(&self) -> &[u64] {
        &self.occupancy
    }

    pub fn balls(&self) -> u64 {
        self.occupancy.iter().sum()
    }

    pub fn all_in_sink(&self) -> bool {
        self.occupancy[1..].iter().all(|&c| c == 0)
    }

    /// Non-zero boxes as an ordered map.
    pub fn as_map(&self) -> BTreeMap<usize, u64> {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, c))
            .collect()
    }
}

/// Parses `"k:count"` pairs separated by commas or whitespace.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, u64)>, BallBoxError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|p| {
            let bad = || BallBoxError::BadPair(p.to_string());
            let (k, c) = p.split_once(':').ok_or_else(bad)?;
            Ok((k.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn bmp1_step(s: &BallBoxState) -> BallBoxState {
    let mut next = s.clone();
    next.labels = None;
    for k in 1..=s.m {
        if s.occupancy[k] > 0 {
            next.occupancy[k] -= 1;
            next.occupancy[k - 1] += 1;
        }
    }
    next
}

/// Steps until every ball is in the sink.
pub fn bmp1_completion(s: &BallBoxState) -> u64 {
    let mut cur = s.clone();
    let mut t = 0;
    while !cur.all_in_sink() {
        cur = bmp1_step(&cur);
        t += 1;
    }
    t
}

/// Completion of the coupled protocol, simulated tick by tick.
pub fn bmp2_completion(s: &BallBoxState) -> Result<u64, BallBoxError> {
    let labels = match &s.labels {
        Some(l) => BallBoxState::with_labels(s.m, l.clone())?.labels.expect("labelled"),
        None => s.canonical_labels(),
    };
    let m = s.m as u64;
    let n = s.balls();
    // where[L] = current box of ball L.
    let mut at = vec![0u64; n as usize + 1];
    for (k, b) in labels.iter().enumerate() {
        for &l in b {
            at[l as usize] = k as u64;
        }
    }
    let mut outside = at.iter().skip(1).filter(|&&k| k > 0).count();
    let mut t = 0u64;
    while outside > 0 {
        t += 1;
        // In the reference run, box k releases ball t - M + k at tick t.
        for k in 1..=m {
            if t + k <= m {
                continue;
            }
            let l = t + k - m;
            if l >= 1 && l <= n && at[l as usize] == k {
                at[l as usize] = k - 1;
                if k == 1 {
                    outside -= 1;
                }
            }
        }
    }
    Ok(t)
}
