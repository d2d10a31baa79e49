//! Evidence of a normalised Gaussian under a wide uniform prior, checked
//! against the closed form.
//!
//! cargo run --release --example evidence_gaussian

use nestshift::model::analytic::{log_normal_mass, Gaussian};
use nestshift::nested::combine_log_evidences;
use nestshift::{run_repeated, ParameterSpace, SamplerConfig};

fn main() {
    let dim = 2;
    let half_width = 10.0;
    let likelihood = Gaussian::isotropic(dim, 0.0, 1.0);
    let space = ParameterSpace::from_bounds(&vec![(-half_width, half_width); dim]).unwrap();
    let config = SamplerConfig {
        live_points: 500,
        n_runs: 8,
        ..SamplerConfig::default()
    };

    let runs: Vec<_> = run_repeated(&likelihood, &space, &config, None)
        .into_iter()
        .map(|r| r.expect("run completes"))
        .collect();
    for r in &runs {
        println!(
            "seed {:>2}  ln E = {:.4}  H = {:.3}  iterations = {}",
            r.seed, r.log_evidence, r.information, r.iterations
        );
    }

    let exact = dim as f64 * (log_normal_mass(-half_width, half_width) - (2.0 * half_width).ln());
    let values: Vec<f64> = runs.iter().map(|r| r.log_evidence).collect();
    let combined = combine_log_evidences(&values);
    let h = runs.iter().map(|r| r.information).sum::<f64>() / runs.len() as f64;
    println!("ln E = {:.4} ± {:.4}   exact {exact:.4}", combined.mean, combined.delta.unwrap());
    println!("sqrt(H/K) = {:.4}", (h / config.live_points as f64).sqrt());
}
