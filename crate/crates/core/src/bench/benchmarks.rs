//! Ready-made benchmark configurations with known truth.
//!
//! The spectra are simulated on the fly from a fixed data seed, so a
//! configuration alone reproduces the dataset.

use crate::bench::config::{ModelChoice, ParamLine, RunConfig, SimulationSpec};
use crate::bench::data::Grid;
use crate::model::{DataKind, ModelSpec};

fn params(spec: &ModelSpec, bounds: &[(f64, f64)]) -> Vec<ParamLine> {
    spec.param_names()
        .into_iter()
        .zip(bounds)
        .map(|(name, &(min, max))| ParamLine { name, min, max })
        .collect()
}

fn spectrum(spec: ModelSpec, truth: Vec<f64>, grid: Grid, bounds: &[(f64, f64)]) -> RunConfig {
    let mut cfg = RunConfig::new(ModelChoice::Spectrum(spec), params(&spec, bounds));
    cfg.simulation = Some(SimulationSpec {
        truth,
        grid,
        seed: 42,
        yerr: 1.0,
    });
    cfg
}

/// Three equal-width Poisson peaks on a flat background. Every peak
/// position shares the prior `[0, 100]`, so the posterior has 3! = 6
/// relabelling modes.
pub fn three_peaks() -> RunConfig {
    let spec = ModelSpec::GaussPeaks { n_peaks: 3 };
    let truth = vec![2.0, 2.5, 22.0, 47.0, 71.0, 30.0, 25.0, 20.0];
    let mut bounds = vec![(0.0, 10.0), (0.5, 6.0)];
    bounds.extend([(0.0, 100.0); 3]);
    bounds.extend([(0.0, 60.0); 3]);
    spectrum(spec, truth, Grid { start: 0.0, stop: 100.0, n: 101 }, &bounds)
}

/// Four equal-width peaks over a flat background at low statistics
/// (4! = 24 relabelling modes).
pub fn four_peaks() -> RunConfig {
    let spec = ModelSpec::GaussPeaks { n_peaks: 4 };
    let truth = vec![1.0, 3.0, 30.0, 75.0, 120.0, 165.0, 12.0, 10.0, 8.0, 6.0];
    let mut bounds = vec![(0.0, 5.0), (1.0, 8.0)];
    bounds.extend([(0.0, 200.0); 4]);
    bounds.extend([(0.0, 40.0); 4]);
    spectrum(spec, truth, Grid { start: 0.0, stop: 200.0, n: 201 }, &bounds)
}

/// Exponentially decaying counts with a sinusoidal modulation. The phase
/// prior covers a full period, so the likelihood is periodic at its edges.
pub fn modulated_decay() -> RunConfig {
    let spec = ModelSpec::ModulatedDecay;
    let truth = vec![200.0, 40.0, 0.3, 0.5, 1.0];
    let bounds = [
        (50.0, 500.0),
        (5.0, 100.0),
        (0.0, 1.0),
        (0.1, 1.0),
        (0.0, std::f64::consts::TAU),
    ];
    spectrum(spec, truth, Grid { start: 0.0, stop: 150.0, n: 151 }, &bounds)
}

/// Normalised unit Gaussian in `dim` dimensions with a uniform prior of
/// ±10σ; ln E is `dim · ln(Φ(10) − Φ(−10)) − dim · ln 20`.
pub fn gaussian(dim: usize) -> RunConfig {
    let params = (1..=dim)
        .map(|j| ParamLine {
            name: format!("x{j}"),
            min: -10.0,
            max: 10.0,
        })
        .collect();
    let mut cfg = RunConfig::new(ModelChoice::Gaussian { center: 0.0, sigma: 1.0 }, params);
    cfg.data_kind = DataKind::Counts;
    cfg
}

/// Flat likelihood `L = exp(log_value)` over `dim` unit intervals.
pub fn constant(dim: usize, log_value: f64) -> RunConfig {
    let params = (1..=dim)
        .map(|j| ParamLine {
            name: format!("x{j}"),
            min: 0.0,
            max: 1.0,
        })
        .collect();
    RunConfig::new(ModelChoice::Constant { log_value }, params)
}
