//! The `exitroad` command line.
//!
//! Exit codes: 0 success or target reached, 1 tick cap exceeded or a
//! failed sweep run, 2 bad input, 3 collision or undefined rule (and any
//! verification failure).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::ballbox::{self, BallBoxState};
use crate::bounds::{self, ProblemParams, Q};
use crate::experiment::{self, SweepSpec};
use crate::fsm::{RuleTable, Variant};
use crate::grid::parse_grid;
use crate::sim::{self, parse_trace, StopReason};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CAP: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "exitroad", version, about = "Exit-lane sorting simulator and verifier")]
pub struct Cli {
    /// Worker threads for verify and sweep.
    #[arg(long, global = true, env = "EXITROAD_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one grid file.
    Run {
        grid: PathBuf,
        #[arg(long, default_value = "A", value_parser = parse_variant)]
        variant: Variant,
        /// Multiple of the proven bound used as the tick cap ("2", "1.5", "3/2").
        #[arg(long, default_value = "2", value_parser = parse_ratio)]
        cap_factor: Q,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustively check every legal configuration of a small grid.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "A", value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, default_value = "2", value_parser = parse_ratio)]
        cap_factor: Q,
        /// Write failing configurations here.
        #[arg(long)]
        failures: Option<PathBuf>,
        /// Also try every initial direction-bit assignment.
        #[arg(long)]
        robustness: bool,
        /// Debug: verify a deliberately broken rule table.
        #[arg(long)]
        corrupt_table: bool,
    },
    /// Run a Monte-Carlo sweep described by a key=value spec file.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Fits CSV; defaults to the output path with a `.fits.csv` suffix.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Ball-and-box completion times for "k:count" pairs.
    Ballbox {
        #[arg(required = true)]
        pairs: Vec<String>,
        /// Number of boxes M; defaults to the highest box given.
        #[arg(long)]
        boxes: Option<usize>,
    },
    /// Print every applicable bound as key,value CSV.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long = "n0")]
        n0: u64,
        #[arg(long = "n1")]
        n1: u64,
        #[arg(long, value_parser = parse_ratio)]
        rho: Option<Q>,
    },
    /// Pretty-print a trace file.
    Render { trace: PathBuf },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant {s:?} (use A or A2)"))
}

/// Parses `"3"`, `"3/2"` or `"1.5"` into an exact ratio.
pub fn parse_ratio(s: &str) -> Result<Q, String> {
    let bad = || format!("not a nonnegative rational: {s:?}");
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        return Ok(Q::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 12 {
        return Err(bad());
    }
    let whole: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let num: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Q::from_integer(whole) + Q::new(num, den))
}

fn ratio_text(q: Q) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        // The global pool can only be configured once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Command::Run {
            grid,
            variant,
            cap_factor,
            trace,
        } => {
            let g = parse_grid(&read(&grid)?).map_err(|e| e.to_string())?;
            if !variant.supports_width(g.cols()) {
                return Err(format!("variant {variant} cannot run on {} columns", g.cols()));
            }
            let violations = g.validate(sim::constraint_for(variant));
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(format!("illegal configuration: {}", list.join("; ")));
            }
            let cap = bounds::ceil_ticks(cap_factor * Q::from_integer(sim::proven_bound(&g, variant)));
            let r = sim::run(&g, variant, cap, trace.is_some()).map_err(|e| e.to_string())?;
            if let (Some(path), Some(t)) = (trace, r.trace.as_ref()) {
                write_file(&path, &t.to_text())?;
            }
            let _ = writeln!(out, "{} {}", r.stop, r.ticks);
            if let Some(f) = &r.fault {
                let _ = writeln!(err, "{f}");
            }
            Ok(match r.stop {
                StopReason::TargetReached => EXIT_OK,
                StopReason::TickCapExceeded => EXIT_CAP,
                StopReason::CollisionDetected | StopReason::UndefinedRuleHit => EXIT_FAULT,
            })
        }
        Command::Verify {
            n,
            m,
            variant,
            cap_factor,
            failures,
            robustness,
            corrupt_table,
        } => {
            let table = if corrupt_table {
                RuleTable::corrupted(variant)
            } else {
                RuleTable::build(variant)
            };
            let report = if robustness {
                verify::verify_memory_robustness(n, m, variant)
            } else {
                verify::verify_all_with(n, m, &table, cap_factor)
            }
            .map_err(|e| e.to_string())?;
            let _ = writeln!(out, "{} {}x{}: {}", variant, n, m, report.summary());
            if let Some(f) = report.failures.first() {
                let _ = writeln!(err, "first failure: {:?}\n{}", f.kind, f.replay);
            }
            if let Some(path) = failures {
                write_file(&path, &report.failures_text())?;
            }
            Ok(if report.ok() { EXIT_OK } else { EXIT_FAULT })
        }
        Command::Sweep {
            spec,
            seed,
            out: out_path,
            fits,
        } => {
            let mut s = SweepSpec::parse(&read(&spec)?).map_err(|e| e.to_string())?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let points = match experiment::run_sweep(&s) {
                Ok(p) => p,
                Err(e @ experiment::ExperimentError::RunFailed { .. }) => {
                    let _ = writeln!(err, "error: {e}");
                    return Ok(EXIT_CAP);
                }
                Err(e) => return Err(e.to_string()),
            };
            write_file(&out_path, &experiment::points_csv(&points))?;
            let fit_list = experiment::sweep_fits(s.param, &points).unwrap_or_default();
            let fits_path = fits.unwrap_or_else(|| {
                let stem = out_path.to_string_lossy();
                PathBuf::from(format!("{}.fits.csv", stem.strip_suffix(".csv").unwrap_or(&stem)))
            });
            write_file(&fits_path, &experiment::fits_csv(&fit_list))?;
            let _ = writeln!(out, "points {} -> {}", points.len(), out_path.display());
            for f in &fit_list {
                let window = if s.param == experiment::SweepParam::N0 { " (window N0 <= n/2)" } else { "" };
                let _ = writeln!(out, "fit {}{}: {:?}", f.kind, window, f.coefficients);
            }
            Ok(EXIT_OK)
        }
        Command::Ballbox { pairs, boxes } => {
            let parsed = ballbox::parse_pairs(&pairs.join(" ")).map_err(|e| e.to_string())?;
            let m = boxes.unwrap_or_else(|| parsed.iter().map(|p| p.0).max().unwrap_or(0));
            let s = BallBoxState::from_pairs(m, &parsed).map_err(|e| e.to_string())?;
            let t2 = ballbox::bmp2_completion(&s).map_err(|e| e.to_string())?;
            let _ = writeln!(out, "bmp1 {}", ballbox::bmp1_completion(&s));
            let _ = writeln!(out, "bmp2 {t2}");
            let _ = writeln!(out, "bound {}", m as u64 + s.balls());
            Ok(EXIT_OK)
        }
        Command::Bounds { n, m, n0, n1, rho } => {
            let mut p = ProblemParams::new(n, m, n0, n1);
            p.rho = rho;
            let ub = bounds::upper_bound_ticks(&p).map_err(|e| e.to_string())?;
            let mut rows: Vec<(String, String)> = vec![
                ("n".into(), n.to_string()),
                ("m".into(), m.to_string()),
                ("N0".into(), n0.to_string()),
                ("N1".into(), n1.to_string()),
                ("upper_bound_ticks".into(), ratio_text(ub)),
                ("cycle_upper_bound".into(), bounds::cycle_upper_bound(n, m, n1).to_string()),
                ("te_cycle_bound".into(), bounds::te_cycle_bound(m, n1).to_string()),
            ];
            if let Ok(w) = bounds::worst_case_single(n, m) {
                rows.push(("worst_case_single".into(), w.to_string()));
            }
            if let Ok(a) = bounds::avg_case_cycle_sums(n, m) {
                rows.push(("average_bound".into(), a.average_bound.to_string()));
            }
            if let Ok(p) = bounds::bottom_half_probability(m) {
                rows.push(("bottom_half_probability".into(), ratio_text(p)));
            }
            if let Some(r) = rho {
                let v = bounds::rho_bound(n, m, n1, r).map_err(|e| e.to_string())?;
                rows.push(("rho_bound".into(), ratio_text(v)));
            }
            if m == 2 {
                let (w, a) = bounds::twolane_bounds(n, n0, n1).map_err(|e| e.to_string())?;
                rows.push(("twolane_worst".into(), w.to_string()));
                rows.push(("twolane_avg".into(), ratio_text(a)));
            }
            let _ = writeln!(out, "key,value");
            for (k, v) in rows {
                let _ = writeln!(out, "{k},{v}");
            }
            Ok(EXIT_OK)
        }
        Command::Render { trace } => {
            let t = parse_trace(&read(&trace)?).map_err(|e| e.to_string())?;
            let _ = writeln!(out, "frames {}", t.snapshots.len());
            for (k, g) in &t.snapshots {
                let _ = writeln!(out, "tick {k}");
                let bar = format!("+{}+", "-".repeat(g.cols()));
                let _ = writeln!(out, "{bar}");
                for row in g.body().lines() {
                    let _ = writeln!(out, "|{row}|");
                }
                let _ = writeln!(out, "{bar}");
            }
            if let Some((r, ticks)) = t.stop {
                let _ = writeln!(out, "stop {r} ticks {ticks}");
            }
            Ok(EXIT_OK)
        }
    }
}
