//! Seeded Monte-Carlo sweeps, curve fits and CSV export.
//!
//! Seeds: run `r` of point `p` under master seed `s` uses
//! `splitmix64(s ^ splitmix64((p << 32) ^ r))` to seed a `ChaCha8Rng`;
//! a configuration is a Fisher-Yates shuffle of `N0` empty cells, `N1`
//! exiting agents and the remaining continue agents.

use std::fmt;
use std::io;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fsm::{RuleTable, Variant};
use crate::grid::{Cell, Grid};
use crate::sim::{self, SimState, StopReason};

pub const DEFAULT_RUNS: usize = 200;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn run_seed(master: u64, point: u64, run: u64) -> u64 {
    splitmix64(master ^ splitmix64((point << 32) ^ run))
}

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("illegal parameters n={n} m={m} N0={n0} N1={n1}: {why}")]
    Illegal {
        n: usize,
        m: usize,
        n0: usize,
        n1: usize,
        why: &'static str,
    },
    #[error("run {run} of point {point} (seed {seed}) stopped with {stop} after {ticks} ticks")]
    RunFailed {
        point: usize,
        run: usize,
        seed: u64,
        stop: StopReason,
        ticks: u64,
    },
    #[error("bad sweep spec: {0}")]
    Spec(String),
    #[error("fit needs at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("x values are degenerate")]
    Degenerate,
    #[error("log-log fit needs positive values")]
    NonPositive,
}

/// Uniformly random placement of `n0` empty cells and `n1` exiting agents.
pub fn random_config(n: usize, m: usize, n0: usize, n1: usize, seed: u64) -> Result<Grid, ExperimentError> {
    let illegal = |why| ExperimentError::Illegal { n, m, n0, n1, why };
    if n < 2 || m < 2 {
        return Err(illegal("grid smaller than 2x2"));
    }
    if n0 == 0 {
        return Err(illegal("no empty cell"));
    }
    if n0 + n1 > n * m {
        return Err(illegal("more empty cells and exiting agents than cells"));
    }
    let mut cells = vec![Cell::Continue; n * m];
    cells[..n0].fill(Cell::Empty);
    cells[n0..n0 + n1].fill(Cell::Exiting);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    Ok(Grid::new(n, m, cells).expect("shape checked"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    M,
    N,
    N0,
    N1,
    Rho,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::M => "m",
            SweepParam::N => "n",
            SweepParam::N0 => "N0",
            SweepParam::N1 => "N1",
            SweepParam::Rho => "rho",
        }
    }

    fn parse(s: &str) -> Option<SweepParam> {
        Some(match s {
            "m" => SweepParam::M,
            "n" => SweepParam::N,
            "N0" => SweepParam::N0,
            "N1" => SweepParam::N1,
            "rho" => SweepParam::Rho,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variant: Variant,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub n0: Option<usize>,
    /// Defaults to `n - 1`.
    pub n1: Option<usize>,
    /// When set, `N0 = round(rho * n * m)`.
    pub rho: Option<f64>,
    pub runs: usize,
    pub seed: u64,
}

/// Fully resolved parameters of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointParams {
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub n0: usize,
    pub n1: usize,
    pub rho: Option<f64>,
}

impl PointParams {
    pub fn check(&self) -> Result<(), ExperimentError> {
        let illegal = |why| ExperimentError::Illegal {
            n: self.n,
            m: self.m,
            n0: self.n0,
            n1: self.n1,
            why,
        };
        if !self.variant.supports_width(self.m) {
            return Err(illegal("width not supported by variant"));
        }
        if self.n < 2 {
            return Err(illegal("fewer than two rows"));
        }
        if self.n0 == 0 {
            return Err(illegal("no empty cell"));
        }
        if self.n0 + self.n1 > self.n * self.m {
            return Err(illegal("more empty cells and exiting agents than cells"));
        }
        if self.variant == Variant::MultiLane && self.n1 >= self.n {
            return Err(illegal("N1 must be below n"));
        }
        Ok(())
    }
}

fn as_count(x: f64, what: &str) -> Result<usize, ExperimentError> {
    if x >= 0.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(ExperimentError::Spec(format!("{what} must be a nonnegative integer, got {x}")))
    }
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<PointParams>, ExperimentError> {
        self.values
            .iter()
            .map(|&x| {
                let mut n = self.n;
                let mut m = self.m.or((self.variant == Variant::TwoLane).then_some(2));
                let mut n0 = self.n0;
                let mut n1 = self.n1;
                let mut rho = self.rho;
                match self.param {
                    SweepParam::M => m = Some(as_count(x, "m")?),
                    SweepParam::N => n = Some(as_count(x, "n")?),
                    SweepParam::N0 => n0 = Some(as_count(x, "N0")?),
                    SweepParam::N1 => n1 = Some(as_count(x, "N1")?),
                    SweepParam::Rho => rho = Some(x),
                }
                let n = n.ok_or_else(|| ExperimentError::Spec("n is required".into()))?;
                let m = m.ok_or_else(|| ExperimentError::Spec("m is required".into()))?;
                if self.param != SweepParam::N0 {
                    if let Some(r) = rho {
                        if !(r > 0.0 && r < 1.0) {
                            return Err(ExperimentError::Spec(format!("rho {r} outside (0,1)")));
                        }
                        n0 = Some(((r * (n * m) as f64).round() as usize).max(1));
                    }
                }
                let n0 = n0.ok_or_else(|| ExperimentError::Spec("N0 or rho is required".into()))?;
                let p = PointParams {
                    variant: self.variant,
                    n,
                    m,
                    n0,
                    n1: n1.unwrap_or(n.saturating_sub(1)),
                    rho,
                };
                p.check()?;
                Ok(p)
            })
            .collect()
    }

    /// Parses the `key=value` spec format. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<SweepSpec, ExperimentError> {
        let err = |s: String| ExperimentError::Spec(s);
        let mut variant = Variant::MultiLane;
        let mut param = None;
        let mut values = None;
        let (mut n, mut m, mut n0, mut n1, mut rho) = (None, None, None, None, None);
        let mut runs = DEFAULT_RUNS;
        let mut seed = 0u64;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key=value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let int = |v: &str| -> Result<usize, ExperimentError> {
                v.parse().map_err(|_| err(format!("line {}: bad integer {v:?}", i + 1)))
            };
            match k {
                "variant" => {
                    variant = Variant::parse(v).ok_or_else(|| err(format!("unknown variant {v:?}")))?
                }
                "sweep" => {
                    param = Some(SweepParam::parse(v).ok_or_else(|| err(format!("unknown sweep parameter {v:?}")))?)
                }
                "values" => {
                    values = Some(
                        v.split(',')
                            .map(|s| s.trim().parse::<f64>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| err(format!("line {}: bad value list", i + 1)))?,
                    )
                }
                "n" => n = Some(int(v)?),
                "m" => m = Some(int(v)?),
                "N0" => n0 = Some(int(v)?),
                "N1" => n1 = Some(int(v)?),
                "rho" => rho = Some(v.parse().map_err(|_| err(format!("bad rho {v:?}")))?),
                "runs" => runs = int(v)?,
                "seed" => seed = v.parse().map_err(|_| err(format!("bad seed {v:?}")))?,
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        let spec = SweepSpec {
            variant,
            param: param.ok_or_else(|| err("missing `sweep`".into()))?,
            values: values.ok_or_else(|| err("missing `values`".into()))?,
            n,
            m,
            n0,
            n1,
            rho,
            runs,
            seed,
        };
        if spec.runs == 0 {
            return Err(err("runs must be positive".into()));
        }
        spec.points()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataPoint {
    pub params: PointParams,
    pub runs: usize,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
    pub stddev: f64,
    /// The proven tick bound of the instance.
    pub bound: u64,
}

impl DataPoint {
    pub fn stderr(&self) -> f64 {
        self.stddev / (self.runs as f64).sqrt()
    }
}

fn aggregate(params: PointParams, ticks: &[u64], bound: u64) -> DataPoint {
    let k = ticks.len() as f64;
    let mean = ticks.iter().map(|&t| t as f64).sum::<f64>() / k;
    let var = if ticks.len() > 1 {
        ticks.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    DataPoint {
        params,
        runs: ticks.len(),
        mean,
        min: *ticks.iter().min().unwrap_or(&0),
        max: *ticks.iter().max().unwrap_or(&0),
        stddev: var.sqrt(),
        bound,
    }
}

/// Completion ticks of every run at one point, in run order.
pub fn run_point(
    p: &PointParams,
    point: usize,
    runs: usize,
    master: u64,
    table: &RuleTable,
) -> Result<Vec<u64>, ExperimentError> {
    p.check()?;
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let seed = run_seed(master, point as u64, r as u64);
            let g = random_config(p.n, p.m, p.n0, p.n1, seed)?;
            let cap = sim::default_cap(&g, p.variant);
            let res = sim::run_state(SimState::new(g), table, cap, false);
            if res.stop == StopReason::TargetReached {
                Ok(res.ticks)
            } else {
                Err(ExperimentError::RunFailed {
                    point,
                    run: r,
                    seed,
                    stop: res.stop,
                    ticks: res.ticks,
                })
            }
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<DataPoint>, ExperimentError> {
    let table = RuleTable::build(spec.variant);
    spec.points()?
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let ticks = run_point(&p, i, spec.runs, spec.seed, &table)?;
            let probe = random_config(p.n, p.m, p.n0, p.n1, 0)?;
            Ok(aggregate(p, &ticks, sim::proven_bound(&probe, p.variant)))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    Poly2,
    LogLog,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::Poly2 => "poly2",
            FitKind::LogLog => "loglog",
        })
    }
}

/// Poly2 coefficients are `[c2, c1, c0]`; log-log ones `[beta, intercept]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub kind: FitKind,
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

impl FitResult {
    pub fn beta(&self) -> Option<f64> {
        (self.kind == FitKind::LogLog).then(|| self.coefficients[0])
    }
}

/// Least squares for `y ~ sum c_k x^k`, returning `[c_deg, ..., c_0]` and
/// the residual norm.
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Vec<f64>, f64), ExperimentError> {
    let need = degree + 1;
    if xs.len() < need || xs.len() != ys.len() {
        return Err(ExperimentError::TooFewPoints { need, got: xs.len().min(ys.len()) });
    }
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < need {
        return Err(ExperimentError::Degenerate);
    }
    // Centre and scale x so the normal system stays well conditioned.
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let scale = xs.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    let a = DMatrix::from_fn(xs.len(), need, |i, j| ((xs[i] - mean) / scale).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let u = svd.solve(&b, 1e-12).map_err(|_| ExperimentError::Degenerate)?;
    let residual = (&a * &u - &b).norm();
    // Expand sum u_j ((x - mean)/scale)^j back into powers of x.
    let mut c = vec![0.0; need];
    for (j, uj) in u.iter().enumerate() {
        for k in 0..=j {
            let binom = (0..k).fold(1.0, |acc, i| acc * (j - i) as f64 / (i + 1) as f64);
            c[k] += uj * binom * (-mean).powi((j - k) as i32) / scale.powi(j as i32);
        }
    }
    c.reverse();
    Ok((c, residual))
}

pub fn fit_poly2(xs: &[f64], ys: &[f64]) -> Result<FitResult, ExperimentError> {
    let (coefficients, residual) = polyfit(xs, ys, 2)?;
    Ok(FitResult {
        kind: FitKind::Poly2,
        coefficients,
        residual,
    })
}

pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<FitResult, ExperimentError> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(ExperimentError::NonPositive);
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (coefficients, residual) = polyfit(&lx, &ly, 1)?;
    Ok(FitResult {
        kind: FitKind::LogLog,
        coefficients,
        residual,
    })
}

fn swept_value(p: &PointParams, param: SweepParam) -> f64 {
    match param {
        SweepParam::M => p.m as f64,
        SweepParam::N => p.n as f64,
        SweepParam::N0 => p.n0 as f64,
        SweepParam::N1 => p.n1 as f64,
        SweepParam::Rho => p.rho.unwrap_or(0.0),
    }
}

/// The fits reported for a sweep: a log-log line over `N0 <= n/2` for
/// `N0` sweeps, a quadratic of the mean otherwise.
pub fn sweep_fits(param: SweepParam, points: &[DataPoint]) -> Result<Vec<FitResult>, ExperimentError> {
    let window: Vec<&DataPoint> = match param {
        SweepParam::N0 => points.iter().filter(|d| 2 * d.params.n0 <= d.params.n).collect(),
        _ => points.iter().collect(),
    };
    let xs: Vec<f64> = window.iter().map(|d| swept_value(&d.params, param)).collect();
    let ys: Vec<f64> = window.iter().map(|d| d.mean).collect();
    Ok(vec![match param {
        SweepParam::N0 => fit_loglog_slope(&xs, &ys)?,
        _ => fit_poly2(&xs, &ys)?,
    }])
}

/// C `%g` with six significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let strip = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mant.to_string()), exp.abs())
    } else {
        strip(format!("{x:.*}", (5 - exp) as usize))
    }
}

pub const POINTS_HEADER: [&str; 11] = ["variant", "n", "m", "N0", "N1", "rho", "runs", "mean", "min", "max", "stddev"];
pub const FITS_HEADER: [&str; 7] = ["kind", "c2", "c1", "c0", "beta", "intercept", "residual"];

pub fn points_csv(points: &[DataPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(POINTS_HEADER).expect("in-memory write");
    for d in points {
        let p = &d.params;
        w.write_record([
            p.variant.name().to_string(),
            p.n.to_string(),
            p.m.to_string(),
            p.n0.to_string(),
            p.n1.to_string(),
            p.rho.map(fmt_g).unwrap_or_default(),
            d.runs.to_string(),
            fmt_g(d.mean),
            d.min.to_string(),
            d.max.to_string(),
            fmt_g(d.stddev),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

pub fn fits_csv(fits: &[FitResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FITS_HEADER).expect("in-memory write");
    for f in fits {
        let c = &f.coefficients;
        let row = match f.kind {
            FitKind::Poly2 => [
                "poly2".to_string(),
                fmt_g(c[0]),
                fmt_g(c[1]),
                fmt_g(c[2]),
                String::new(),
                String::new(),
                fmt_g(f.residual),
            ],
            FitKind::LogLog => [
                "loglog".to_string(),
                String::new(),
                String::new(),
                String::new(),
                fmt_g(c[0]),
                fmt_g(c[1]),
                fmt_g(f.residual),
            ],
        };
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

pub fn export_points(points: &[DataPoint], path: &Path) -> io::Result<()> {
    std::fs::write(path, points_csv(points))
}

pub fn export_fits(fits: &[FitResult], path: &Path) -> io::Result<()> {
    std::fs::write(path, fits_csv(fits))
}

/// Numeric columns of a points CSV: `(n, m, N0, N1, runs, mean, min, max, stddev)`.
pub type PointRow = (usize, usize, usize, usize, usize, f64, u64, u64, f64);

pub fn parse_points_csv(text: &str) -> Result<Vec<PointRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<(String, usize, usize, usize, usize, String, usize, f64, u64, u64, f64)>()
        .map(|rec| rec.map(|(_, n, m, n0, n1, _, runs, mean, min, max, sd)| (n, m, n0, n1, runs, mean, min, max, sd)))
        .collect()
}
