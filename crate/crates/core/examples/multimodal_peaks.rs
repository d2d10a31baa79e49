//! Three-peak Poisson spectrum with and without cluster recognition.
//!
//! Every peak position has the same prior, so the posterior has six
//! relabelling modes. With clustering each run keeps all of them; without
//! it, walks scaled by the spread of the whole ensemble stall once the
//! modes are narrow, and runs either collapse onto one mode or abort.
//!
//! cargo run --release --example multimodal_peaks -- [runs]

use nestshift::bench::benchmarks::three_peaks;
use nestshift::bench::run::{analyze, prepare};

fn main() {
    let runs: usize = std::env::args().nth(1).map_or(4, |s| s.parse().expect("number of runs"));
    let mut cfg = three_peaks();
    cfg.sampler.n_runs = runs;
    let problem = prepare(&cfg, ".".as_ref()).unwrap();

    for clustering in [true, false] {
        cfg.clustering = clustering;
        let analysis = analyze(&cfg, &problem);
        println!("clustering {}", if clustering { "on" } else { "off" });
        for o in &analysis.outcomes {
            match o {
                Ok(r) => {
                    let post = nestshift::WeightedPosterior::from_run(r).unwrap();
                    let h = post.marginal_hist(2, 100, (0.0, 100.0)).unwrap();
                    let near: Vec<f64> = [22.0, 47.0, 71.0].iter().map(|p| h.mass_between(p - 5.0, p + 5.0)).collect();
                    println!(
                        "  seed {:>2}  ln E = {:.3}  clusterings = {}  pos1 mass near each peak {:.2?}",
                        r.seed, r.log_evidence, r.cluster_invocations, near
                    );
                }
                Err(f) => println!("  {f}"),
            }
        }
        if let Some(e) = analysis.evidence() {
            println!("  ln E = {:.3} ± {}", e.mean, e.delta.map_or("n/a".into(), |d| format!("{d:.3}")));
        }
    }
}
