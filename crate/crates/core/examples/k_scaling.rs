//! How the run-to-run scatter of ln E and the CPU time grow with the number
//! of live points, with power-law fits.
//!
//! cargo run --release --example k_scaling

use nestshift::bench::benchmarks::gaussian;
use nestshift::bench::kscan::{kscan, FitExclusions};
use nestshift::bench::run::prepare;

fn main() {
    let mut cfg = gaussian(3);
    cfg.sampler.n_runs = 16;
    let problem = prepare(&cfg, ".".as_ref()).unwrap();
    let exclusions = FitExclusions {
        delta_min_k: 0,
        cpu_max_k: usize::MAX,
    };
    let scan = kscan(&cfg, &problem, &[100, 200, 400, 800], exclusions);
    print!("{}", scan.table_csv());
    println!();
    print!("{}", scan.fit_text());
}
