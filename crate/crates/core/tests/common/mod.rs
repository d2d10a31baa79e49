//! Reference implementations used as oracles by several test targets.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Straightforward mean shift: every point climbs on its own until its step
/// is below `tol`, against min-max scaled copies of the input; final
/// positions closer than `merge` are chained into one group.
pub fn naive_mean_shift(points: &[Vec<f64>], radius: f64, bandwidth: f64, tol: f64, merge: f64) -> Vec<usize> {
    let dim = points[0].len();
    let lo: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let scaled: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (0..dim)
                .map(|j| if hi[j] > lo[j] { (p[j] - lo[j]) / (hi[j] - lo[j]) } else { 0.5 })
                .collect()
        })
        .collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();

    let mut ends = Vec::new();
    for start in &scaled {
        let mut x = start.clone();
        for _ in 0..100_000 {
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for p in &scaled {
                let d = dist(&x, p);
                if d <= radius {
                    let w = (-d / bandwidth).exp();
                    den += w;
                    for j in 0..dim {
                        num[j] += w * p[j];
                    }
                }
            }
            let next: Vec<f64> = num.iter().map(|v| v / den).collect();
            let moved = dist(&x, &next);
            x = next;
            if moved < tol {
                break;
            }
        }
        ends.push(x);
    }

    // Connected components of the "closer than merge" graph by flood fill.
    let n = ends.len();
    let mut group = vec![usize::MAX; n];
    let mut next_group = 0;
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = next_group;
        let mut stack = vec![i];
        while let Some(a) = stack.pop() {
            for b in 0..n {
                if group[b] == usize::MAX && dist(&ends[a], &ends[b]) < merge {
                    group[b] = next_group;
                    stack.push(b);
                }
            }
        }
        next_group += 1;
    }
    group
}

/// True when two labelings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|k| (a[i] == a[k]) == (b[i] == b[k])))
}

/// `n_blobs` Gaussian blobs with random centres and spreads, `k` points in
/// total, row-major.
pub fn planted_blobs<R: Rng>(rng: &mut R, k: usize, dim: usize, n_blobs: usize) -> Vec<f64> {
    let centers: Vec<Vec<f64>> = (0..n_blobs)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let spreads: Vec<f64> = (0..n_blobs).map(|_| rng.random_range(0.2..1.5)).collect();
    let mut out = Vec::with_capacity(k * dim);
    for i in 0..k {
        let b = i % n_blobs;
        let noise = Normal::new(0.0, spreads[b]).unwrap();
        for c in &centers[b][..dim] {
            out.push(c + noise.sample(rng));
        }
    }
    out
}
