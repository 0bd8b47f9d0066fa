//! Completion time against the number of columns, with a quadratic fit.

use exitroad::experiment::{fit_poly2, run_sweep, SweepParam, SweepSpec};
use exitroad::Variant;

fn main() {
    let n0 = 3;
    let spec = SweepSpec {
        variant: Variant::MultiLane,
        param: SweepParam::M,
        values: vec![3.0, 4.0, 5.0, 6.0],
        n: Some(10),
        m: None,
        n0: Some(n0),
        n1: None,
        rho: None,
        runs: 40,
        seed: 1,
    };
    let points = run_sweep(&spec).unwrap();
    for d in &points {
        println!("m={} mean={:.1} min={} max={}", d.params.m, d.mean, d.min, d.max);
    }
    let xs: Vec<f64> = points.iter().map(|d| d.params.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|d| d.mean).collect();
    let fit = fit_poly2(&xs, &ys).unwrap();
    println!(
        "T ~ {:.3} m^2 + {:.3} m + {:.3}; leading term per n/N0: {:.3}",
        fit.coefficients[0],
        fit.coefficients[1],
        fit.coefficients[2],
        fit.coefficients[0] * n0 as f64 / 10.0
    );
}
