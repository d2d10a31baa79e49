//! Mean-shift clustering of three Gaussian blobs of different size and
//! spread, with the per-cluster standard deviations the walker would use.
//!
//! cargo run --release --example mean_shift_blobs

use nestshift::cluster::{cluster, ClusterConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let blobs = [([0.0, 0.0], 0.3, 150), ([6.0, 1.0], 0.5, 100), ([2.0, 7.0], 0.2, 50)];
    let mut points = Vec::new();
    for (center, spread, n) in blobs {
        let noise = Normal::new(0.0, spread).unwrap();
        for _ in 0..n {
            points.push(center[0] + noise.sample(&mut rng));
            points.push(center[1] + noise.sample(&mut rng));
        }
    }

    let result = cluster(&points, 2, &ClusterConfig::default());
    println!("{} clusters after {} mean-shift steps", result.n_clusters(), result.steps);
    for (c, size) in result.sizes.iter().enumerate() {
        println!("cluster {c}: {size:>3} points, sigma = {:.3?}", result.sigma[c]);
    }
}
