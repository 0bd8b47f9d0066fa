//! Seeded Monte-Carlo sweep over the number of empty cells with a log-log fit.
//!
//! Writes `points.csv` and `fits.csv` to the directory given as the first
//! argument, or prints them when none is given.

use exitroad::experiment::{fits_csv, points_csv, run_sweep, sweep_fits, SweepSpec};

const SPEC: &str = "\
variant = A
sweep = N0
values = 1,2,3,4,6,8
n = 16
m = 4
N1 = 15
runs = 50
seed = 7
";

fn main() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let points = run_sweep(&spec).unwrap();
    let fits = sweep_fits(spec.param, &points).unwrap();
    let (p, f) = (points_csv(&points), fits_csv(&fits));
    match std::env::args().nth(1) {
        Some(dir) => {
            let dir = std::path::Path::new(&dir);
            std::fs::write(dir.join("points.csv"), p).unwrap();
            std::fs::write(dir.join("fits.csv"), f).unwrap();
        }
        None => print!("{p}\n{f}"),
    }
    println!("beta = {:.3}", fits[0].beta().unwrap());
}
