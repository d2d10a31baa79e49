//! Posterior summaries from the weighted sample chain of one or more runs.

use thiserror::Error;

use crate::nested::NestedRun;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PosteriorError {
    #[error("histogram range [{lo}, {hi}] has no width")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("parameter index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("no runs with a finite evidence")]
    NoRuns,
}

/// Samples with normalised posterior weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPosterior {
    dim: usize,
    /// Row-major `M × J`.
    params: Vec<f64>,
    weights: Vec<f64>,
    log_ls: Vec<f64>,
}

impl WeightedPosterior {
    /// Builds the posterior of one run, live remainder included. Weights are
    /// `exp(ln w_m − ln E)`, renormalised against round-off.
    pub fn from_run(run: &NestedRun) -> Result<Self, PosteriorError> {
        Self::pooled([run])
    }

    /// Equal-weight mixture of the posteriors of several runs.
    pub fn pooled<'a, I>(runs: I) -> Result<Self, PosteriorError>
    where
        I: IntoIterator<Item = &'a NestedRun>,
    {
        let runs: Vec<&NestedRun> = runs.into_iter().filter(|r| r.log_evidence.is_finite()).collect();
        let Some(first) = runs.first() else {
            return Err(PosteriorError::NoRuns);
        };
        let dim = first.samples.first().map_or(0, |s| s.params.len());
        let share = 1.0 / runs.len() as f64;
        let mut params = Vec::new();
        let mut weights = Vec::new();
        let mut log_ls = Vec::new();
        for run in runs {
            let start = weights.len();
            for s in run.all_samples() {
                params.extend_from_slice(&s.params);
                weights.push((s.log_weight - run.log_evidence).exp());
                log_ls.push(s.log_l);
            }
            let total: f64 = weights[start..].iter().sum();
            weights[start..].iter_mut().for_each(|w| *w *= share / total);
        }
        Ok(Self {
            dim,
            params,
            weights,
            log_ls,
        })
    }

    /// Builds a posterior from raw parts. Weights are normalised here.
    pub fn from_parts(dim: usize, params: Vec<f64>, weights: Vec<f64>, log_ls: Vec<f64>) -> Self {
        assert_eq!(params.len(), dim * weights.len());
        assert_eq!(weights.len(), log_ls.len());
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self {
            dim,
            params,
            weights,
            log_ls,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_ls(&self) -> &[f64] {
        &self.log_ls
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.params[i * self.dim..(i + 1) * self.dim]
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.params.iter().skip(j).step_by(self.dim).copied()
    }

    fn check(&self, j: usize) -> Result<(), PosteriorError> {
        if j < self.dim {
            Ok(())
        } else {
            Err(PosteriorError::Index {
                index: j,
                dim: self.dim,
            })
        }
    }

    /// Sample with the highest log-likelihood (first on ties).
    pub fn max_likelihood_index(&self) -> usize {
        let mut best = 0;
        for (i, &l) in self.log_ls.iter().enumerate() {
            if l > self.log_ls[best] {
                best = i;
            }
        }
        best
    }

    pub fn summarize(&self, j: usize) -> Result<ParamSummary, PosteriorError> {
        self.check(j)?;
        let mut pairs: Vec<(f64, f64)> = self.column(j).zip(self.weights.iter().copied()).collect();
        let mean: f64 = pairs.iter().map(|(x, w)| x * w).sum();
        let var: f64 = pairs.iter().map(|(x, w)| w * (x - mean) * (x - mean)).sum();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let q = |p: f64| weighted_quantile(&pairs, p);
        let ci = |level: f64| (q((1.0 - level) / 2.0), q((1.0 + level) / 2.0));
        Ok(ParamSummary {
            mean,
            median: q(0.5),
            std: var.max(0.0).sqrt(),
            ci68: ci(0.68),
            ci95: ci(0.95),
            ci99: ci(0.99),
            ml_value: self.sample(self.max_likelihood_index())[j],
        })
    }

    pub fn marginal_hist(&self, j: usize, bins: usize, range: (f64, f64)) -> Result<Histogram1D, PosteriorError> {
        self.check(j)?;
        let axis = Axis::new(bins, range)?;
        let mut mass = vec![0.0; bins];
        let mut out_of_range = 0.0;
        for (x, w) in self.column(j).zip(&self.weights) {
            match axis.bin(x) {
                Some(b) => mass[b] += w,
                None => out_of_range += w,
            }
        }
        Ok(Histogram1D {
            lo: range.0,
            hi: range.1,
            mass,
            out_of_range,
        })
    }

    pub fn joint_hist(
        &self,
        j1: usize,
        j2: usize,
        bins: (usize, usize),
        ranges: ((f64, f64), (f64, f64)),
    ) -> Result<Histogram2D, PosteriorError> {
        self.check(j1)?;
        self.check(j2)?;
        let a1 = Axis::new(bins.0, ranges.0)?;
        let a2 = Axis::new(bins.1, ranges.1)?;
        let mut mass = vec![0.0; bins.0 * bins.1];
        let mut out_of_range = 0.0;
        for ((x, y), w) in self.column(j1).zip(self.column(j2)).zip(&self.weights) {
            match (a1.bin(x), a2.bin(y)) {
                (Some(b1), Some(b2)) => mass[b1 * bins.1 + b2] += w,
                _ => out_of_range += w,
            }
        }
        Ok(Histogram2D {
            range1: ranges.0,
            range2: ranges.1,
            bins,
            mass,
            out_of_range,
        })
    }
}

/// Smallest value whose cumulative weight exceeds `p`. `sorted` holds
/// `(value, weight)` pairs ordered by value.
fn weighted_quantile(sorted: &[(f64, f64)], p: f64) -> f64 {
    let mut cum = 0.0;
    for &(x, w) in sorted {
        cum += w;
        if cum > p {
            return x;
        }
    }
    sorted.last().map_or(f64::NAN, |(x, _)| *x)
}

struct Axis {
    bins: usize,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(bins: usize, (lo, hi): (f64, f64)) -> Result<Self, PosteriorError> {
        if bins == 0 {
            return Err(PosteriorError::NoBins);
        }
        if !(hi > lo) {
            return Err(PosteriorError::EmptyRange { lo, hi });
        }
        Ok(Self { bins, lo, hi })
    }

    /// Bins are half-open except the last, which includes `hi`.
    fn bin(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let b = ((x - self.lo) / (self.hi - self.lo) * self.bins as f64) as usize;
        Some(b.min(self.bins - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub ci68: (f64, f64),
    pub ci95: (f64, f64),
    pub ci99: (f64, f64),
    /// Value at the maximum-likelihood sample.
    pub ml_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub lo: f64,
    pub hi: f64,
    pub mass: Vec<f64>,
    pub out_of_range: f64,
}

impl Histogram1D {
    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.mass.len() as f64;
        (self.lo + b as f64 * width, self.lo + (b + 1) as f64 * width)
    }

    /// Mass of all bins overlapping `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        (0..self.mass.len())
            .filter(|&b| {
                let (a, z) = self.bin_edges(b);
                z > lo && a < hi
            })
            .map(|b| self.mass[b])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub range1: (f64, f64),
    pub range2: (f64, f64),
    pub bins: (usize, usize),
    /// Row-major `bins.0 × bins.1`.
    pub mass: Vec<f64>,
    pub out_of_range: f64,
}

impl Histogram2D {
    pub fn at(&self, b1: usize, b2: usize) -> f64 {
        self.mass[b1 * self.bins.1 + b2]
    }

    /// Sum over the second axis.
    pub fn marginal_first(&self) -> Vec<f64> {
        self.mass.chunks_exact(self.bins.1).map(|row| row.iter().sum()).collect()
    }

    /// Sum over the first axis.
    pub fn marginal_second(&self) -> Vec<f64> {
        (0..self.bins.1)
            .map(|b2| (0..self.bins.0).map(|b1| self.at(b1, b2)).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn two_point_conventions() {
        let post = WeightedPosterior::from_parts(1, vec![0.0, 1.0], vec![0.5, 0.5], vec![0.0, 0.0]);
        let s = post.summarize(0).unwrap();
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.median, 1.0);
    }

    #[test]
    fn single_sample_degenerates() {
        let post = WeightedPosterior::from_parts(2, vec![3.0, -1.0], vec![1.0], vec![-2.0]);
        let s = post.summarize(1).unwrap();
        assert_eq!((s.mean, s.median, s.std), (-1.0, -1.0, 0.0));
        assert_eq!(s.ci68, (-1.0, -1.0));
        assert_eq!(s.ci99, (-1.0, -1.0));
        assert_eq!(s.ml_value, -1.0);
    }

    #[test]
    fn normal_draws_credible_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let post = WeightedPosterior::from_parts(1, xs, vec![1.0; n], vec![0.0; n]);
        let s = post.summarize(0).unwrap();
        assert_abs_diff_eq!(s.ci68.0, -1.0, epsilon = 0.05);
        assert_abs_diff_eq!(s.ci68.1, 1.0, epsilon = 0.05);
        assert!(s.ci99.0 <= s.ci95.0 && s.ci95.0 <= s.ci68.0);
        assert!(s.ci68.1 <= s.ci95.1 && s.ci95.1 <= s.ci99.1);
    }

    #[test]
    fn point_mass_histogram() {
        let post = WeightedPosterior::from_parts(1, vec![0.3; 4], vec![1.0; 4], vec![0.0; 4]);
        let h = post.marginal_hist(0, 10, (0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(h.mass[3], 1.0, epsilon = 1e-15);
        assert_eq!(h.mass.iter().filter(|m| **m > 0.0).count(), 1);
        assert!(post.marginal_hist(0, 10, (1.0, 1.0)).is_err());
        assert!(post.marginal_hist(0, 0, (0.0, 1.0)).is_err());
        assert!(post.marginal_hist(1, 3, (0.0, 1.0)).is_err());
    }

    #[test]
    fn out_of_range_mass_reported() {
        let post = WeightedPosterior::from_parts(1, vec![-1.0, 0.5, 2.0, 1.0], vec![1.0; 4], vec![0.0; 4]);
        let h = post.marginal_hist(0, 4, (0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(h.out_of_range, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.mass.iter().sum::<f64>(), 0.5, epsilon = 1e-15);
        // upper edge belongs to the last bin
        assert_abs_diff_eq!(h.mass[3], 0.25, epsilon = 1e-15);
    }
}
