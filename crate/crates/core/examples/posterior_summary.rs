//! Fit of a single Gaussian peak to simulated counts: parameter means,
//! medians and credible intervals, and a marginal histogram.
//!
//! cargo run --release --example posterior_summary

use nestshift::bench::data::{simulate, Grid};
use nestshift::{
    run_repeated, DataKind, ModelSpec, ParameterSpace, SamplerConfig, SpectrumLikelihood, WeightedPosterior,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let spec = ModelSpec::GaussPeaks { n_peaks: 1 };
    let truth = [3.0, 4.0, 50.0, 40.0];
    let grid = Grid {
        start: 0.0,
        stop: 100.0,
        n: 101,
    };
    let data = simulate(&spec, &truth, &grid, DataKind::Counts, 0.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let likelihood = SpectrumLikelihood::new(spec, data);
    let space = ParameterSpace::new(spec.param_names(), vec![0.0, 0.5, 0.0, 0.0], vec![10.0, 10.0, 100.0, 100.0]).unwrap();
    let config = SamplerConfig {
        live_points: 300,
        n_runs: 4,
        ..SamplerConfig::default()
    };
    let runs: Vec<_> = run_repeated(&likelihood, &space, &config, None)
        .into_iter()
        .filter_map(Result::ok)
        .collect();
    let post = WeightedPosterior::pooled(&runs).unwrap();

    println!("{:<6} {:>8} {:>8} {:>8} {:>20} {:>8}", "param", "truth", "mean", "median", "68% interval", "std");
    for (j, name) in space.names().iter().enumerate() {
        let s = post.summarize(j).unwrap();
        println!(
            "{name:<6} {:>8.3} {:>8.3} {:>8.3}   [{:>7.3}, {:>7.3}] {:>8.3}",
            truth[j], s.mean, s.median, s.ci68.0, s.ci68.1, s.std
        );
    }

    let h = post.marginal_hist(2, 20, (48.0, 52.0)).unwrap();
    println!("\nmarginal of pos1:");
    for (b, m) in h.mass.iter().enumerate() {
        let (lo, hi) = h.bin_edges(b);
        println!("{lo:6.2}-{hi:6.2} {}", "#".repeat((m * 200.0).round() as usize));
    }
}
