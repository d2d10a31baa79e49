//! Column data files and synthetic spectra.
//!
//! Files are whitespace-separated: `x count` for counts, `x y yerr` for
//! Gaussian data. `#` starts a comment; blank lines are skipped.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::model::{DataKind, Dataset, ModelError, ModelSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid data file:\n{}", format_lines(.0))]
    Lines(Vec<(usize, String)>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model intensity {value} at x = {x} is negative; cannot draw counts")]
    NegativeIntensity { x: f64, value: f64 },
}

fn format_lines(lines: &[(usize, String)]) -> String {
    lines
        .iter()
        .map(|(n, m)| format!("  line {n}: {m}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn read_data(path: &Path, kind: DataKind) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_data(&text, kind)
}

pub fn parse_data(text: &str, kind: DataKind) -> Result<Dataset, DataError> {
    let columns = match kind {
        DataKind::Counts => 2,
        DataKind::GaussianErrors => 3,
    };
    let mut cols: [Vec<f64>; 3] = Default::default();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != columns {
            problems.push((line_no, format!("expected {columns} columns, found {}", fields.len())));
            continue;
        }
        let values: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let Ok(values) = values else {
            problems.push((line_no, format!("unparsable number in `{line}`")));
            continue;
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            problems.push((line_no, format!("non-finite value {bad}")));
            continue;
        }
        match kind {
            DataKind::Counts if values[1] < 0.0 || values[1].fract() != 0.0 => {
                problems.push((line_no, format!("count {} is not a non-negative integer", values[1])));
                continue;
            }
            DataKind::GaussianErrors if values[2] <= 0.0 => {
                problems.push((line_no, format!("uncertainty {} must be > 0", values[2])));
                continue;
            }
            _ => {}
        }
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v);
        }
    }
    if !problems.is_empty() {
        return Err(DataError::Lines(problems));
    }
    if cols[0].is_empty() {
        return Err(DataError::Lines(vec![(0, "no data rows".into())]));
    }
    let [x, y, yerr] = cols;
    Ok(match kind {
        DataKind::Counts => Dataset::counts(x, y)?,
        DataKind::GaussianErrors => Dataset::gaussian(x, y, yerr)?,
    })
}

/// Serialises a dataset in the format read by [`parse_data`]. Values are
/// written with round-trip precision.
pub fn format_data(data: &Dataset) -> String {
    let mut out = String::new();
    match data.yerr() {
        None => {
            for (x, y) in data.x().iter().zip(data.y()) {
                let _ = writeln!(out, "{x} {y}");
            }
        }
        Some(yerr) => {
            for ((x, y), e) in data.x().iter().zip(data.y()).zip(yerr) {
                let _ = writeln!(out, "{x} {y} {e}");
            }
        }
    }
    out
}

/// Evenly spaced abscissae `start, ..., stop` (inclusive), `n ≥ 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + i as f64 * step).collect()
    }
}

/// Draws a synthetic dataset from `spec` at `truth`: Poisson counts, or
/// Gaussian measurements with constant uncertainty `yerr`.
pub fn simulate<R: Rng + ?Sized>(
    spec: &ModelSpec,
    truth: &[f64],
    grid: &Grid,
    kind: DataKind,
    yerr: f64,
    rng: &mut R,
) -> Result<Dataset, DataError> {
    let x = grid.points();
    let mean = spec.eval(truth, &x)?;
    match kind {
        DataKind::Counts => {
            let mut y = Vec::with_capacity(x.len());
            for (&xi, &lambda) in x.iter().zip(&mean) {
                if lambda < 0.0 {
                    return Err(DataError::NegativeIntensity { x: xi, value: lambda });
                }
                y.push(if lambda == 0.0 {
                    0.0
                } else {
                    Poisson::new(lambda).expect("positive finite rate").sample(rng)
                });
            }
            Ok(Dataset::counts(x, y)?)
        }
        DataKind::GaussianErrors => {
            let noise = Normal::new(0.0, yerr).map_err(|_| ModelError::NonPositive("yerr"))?;
            let y = mean.iter().map(|m| m + noise.sample(rng)).collect();
            Ok(Dataset::gaussian(x.clone(), y, vec![yerr; x.len()])?)
        }
    }
}

/// `key: value` sidecar recording the truth behind a simulated dataset.
pub fn format_truth(spec: &ModelSpec, names: &[String], truth: &[f64], seed: u64) -> String {
    let mut out = String::new();
    let model = match spec {
        ModelSpec::GaussPeaks { n_peaks } => format!("gauss_peaks {n_peaks}"),
        ModelSpec::ModulatedDecay => "modulated_decay".to_string(),
    };
    let _ = writeln!(out, "model: {model}");
    let _ = writeln!(out, "seed: {seed}");
    for (name, value) in names.iter().zip(truth) {
        let _ = writeln!(out, "truth_{name}: {value}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_counts() {
        let d = parse_data("1 5\n2 3\n", DataKind::Counts).unwrap();
        assert_eq!(d.x(), &[1.0, 2.0]);
        assert_eq!(d.y(), &[5.0, 3.0]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let d = parse_data("# header\n\n1 2 0.5  # trailing\n\n3 4 1\n", DataKind::GaussianErrors).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.yerr().unwrap(), &[0.5, 1.0]);
    }

    #[test]
    fn per_line_diagnostics() {
        let err = parse_data("1 5 0.0", DataKind::GaussianErrors).unwrap_err();
        let DataError::Lines(lines) = err else { panic!() };
        assert_eq!(lines[0].0, 1);
        assert!(lines[0].1.contains("uncertainty"));

        let err = parse_data("1 5\n2\n3 -1\n4 x\n", DataKind::Counts).unwrap_err();
        let DataError::Lines(lines) = err else { panic!() };
        let numbers: Vec<usize> = lines.iter().map(|l| l.0).collect();
        assert_eq!(numbers, vec![2, 3, 4]);
    }

    #[test]
    fn background_only_counts_have_poisson_mean() {
        let spec = ModelSpec::GaussPeaks { n_peaks: 2 };
        let lambda = 4.0;
        let truth = [lambda, 1.0, 10.0, 20.0, 0.0, 0.0];
        let grid = Grid {
            start: 0.0,
            stop: 99.0,
            n: 4000,
        };
        let d = simulate(&spec, &truth, &grid, DataKind::Counts, 0.0, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let n = d.len() as f64;
        let mean = d.y().iter().sum::<f64>() / n;
        assert!((mean - lambda).abs() < 3.0 * (lambda / n).sqrt(), "{mean}");
    }

    #[test]
    fn simulation_is_seeded_and_round_trips() {
        let spec = ModelSpec::GaussPeaks { n_peaks: 1 };
        let truth = [1.0, 2.0, 5.0, 30.0];
        let grid = Grid {
            start: 0.0,
            stop: 10.0,
            n: 11,
        };
        for kind in [DataKind::Counts, DataKind::GaussianErrors] {
            let a = simulate(&spec, &truth, &grid, kind, 0.7, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            let b = simulate(&spec, &truth, &grid, kind, 0.7, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(format_data(&a), format_data(&b));
            assert_eq!(parse_data(&format_data(&a), kind).unwrap(), a);
        }
    }

    #[test]
    fn negative_intensity_rejected() {
        let spec = ModelSpec::GaussPeaks { n_peaks: 1 };
        let grid = Grid {
            start: 0.0,
            stop: 1.0,
            n: 2,
        };
        let r = simulate(&spec, &[-1.0, 1.0, 0.0, 0.0], &grid, DataKind::Counts, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(r, Err(DataError::NegativeIntensity { .. })));
    }
}
