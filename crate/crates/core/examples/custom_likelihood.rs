//! Any `Fn(&[f64]) -> f64 + Sync` closure is a likelihood. Here: two
//! unequal Gaussian bumps far apart, with a closed-form evidence.
//!
//! The walk counts only accepted steps, so its end point leans towards the
//! interior of the constrained region, where steps are accepted more often.
//! That pushes ln E up by an amount that grows with the step size relative
//! to the region, which is large here because σ spans both bumps. The run
//! is repeated with a smaller step factor to show it.
//!
//! cargo run --release --example custom_likelihood

use nestshift::{combine_runs, run_repeated, ClusterConfig, ParameterSpace, SamplerConfig, WalkConfig, WeightedPosterior};

fn main() {
    let sigma: f64 = 0.3;
    let (left, right) = ([-2.0, -2.0], [2.5, 1.0]);
    let weight_right: f64 = 0.25;
    let bump = |p: &[f64], c: [f64; 2]| {
        let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        (-0.5 * r2 / (sigma * sigma)).exp()
    };
    let likelihood = |p: &[f64]| ((1.0 - weight_right) * bump(p, left) + weight_right * bump(p, right)).ln();
    let space = ParameterSpace::from_bounds(&[(-5.0, 5.0), (-5.0, 5.0)]).unwrap();
    // Each bump integrates to 2πσ² (both sit well inside the box).
    let exact = (std::f64::consts::TAU * sigma * sigma / 100.0).ln();

    for step_factor in [0.2, 0.05] {
        let config = SamplerConfig {
            live_points: 400,
            n_runs: 8,
            walk: WalkConfig {
                step_factor,
                ..WalkConfig::default()
            },
            ..SamplerConfig::default()
        };
        let runs: Vec<_> = run_repeated(&likelihood, &space, &config, Some(&ClusterConfig::default()))
            .into_iter()
            .map(|r| r.expect("run completes"))
            .collect();
        let evidence = combine_runs(&runs);
        let post = WeightedPosterior::pooled(&runs).unwrap();
        let right_mass: f64 = (0..post.len())
            .filter(|&i| post.sample(i)[0] > 0.0)
            .map(|i| post.weights()[i])
            .sum();
        println!(
            "f = {step_factor}: ln E = {:.4} ± {:.4} (exact {exact:.4}), right bump mass {right_mass:.3} (exact {weight_right})",
            evidence.mean,
            evidence.delta.unwrap(),
        );
    }
}
