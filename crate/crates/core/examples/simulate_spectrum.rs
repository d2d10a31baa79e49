//! Draws a four-peak spectrum, writes it in the column format read by the
//! `run` command, and reads it back.
//!
//! cargo run --release --example simulate_spectrum -- [out_dir]

use nestshift::bench::benchmarks::four_peaks;
use nestshift::bench::data::{format_data, read_data, simulate};
use nestshift::bench::config::ModelChoice;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string());
    let cfg = four_peaks();
    let ModelChoice::Spectrum(spec) = cfg.model else { unreachable!() };
    let sim = cfg.simulation.as_ref().unwrap();
    let data = simulate(&spec, &sim.truth, &sim.grid, cfg.data_kind, sim.yerr, &mut ChaCha8Rng::seed_from_u64(sim.seed)).unwrap();

    let path = std::path::Path::new(&dir).join("four_peaks.dat");
    std::fs::write(&path, format_data(&data)).unwrap();
    let back = read_data(&path, cfg.data_kind).unwrap();
    assert_eq!(back, data);

    let total: f64 = data.y().iter().sum();
    let peak = data.y().iter().cloned().fold(0.0, f64::max);
    println!("{} channels, {total} counts, highest channel {peak}", data.len());
    println!("written to {}", path.display());
}
