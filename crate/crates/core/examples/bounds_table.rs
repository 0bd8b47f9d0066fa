//! Closed-form time bounds for a range of grid sizes, as exact rationals.

use exitroad::bounds::{
    avg_case_cycle_sums, cycle_upper_bound, rho_bound, upper_bound_ticks, worst_case_single,
    ProblemParams, Q,
};

fn main() {
    println!("n,m,worst_single,upper(N0=1;N1=n-1),cycles(N1=n-1),avg_bound,rho0.6");
    for n in [3u64, 6, 12] {
        for m in [3u64, 4, 8] {
            let p = ProblemParams::new(n, m, 1, n - 1);
            println!(
                "{n},{m},{},{},{},{},{}",
                worst_case_single(n, m).unwrap(),
                upper_bound_ticks(&p).unwrap(),
                cycle_upper_bound(n, m, n - 1),
                avg_case_cycle_sums(n, m).unwrap().average_bound,
                rho_bound(n, m, n - 1, Q::new(3, 5)).unwrap()
            );
        }
    }
}
