//! Mean-shift cluster recognition on live points.
//!
//! Points are first min-max normalised per dimension so the neighbour radius
//! and kernel bandwidth are dimensionless. Every point then climbs to a mode
//! of the kernel-weighted density of the *original* point set; points whose
//! modes end up close together form a cluster.

use thiserror::Error;

use crate::walker::ClusterHook;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("neighbour radius {radius} must lie in (0, sqrt(dim) = {max}]")]
    Radius { radius: f64, max: f64 },
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Unit weight for every neighbour.
    Flat,
    /// Exponentially decaying weight, see [`GaussianForm`].
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussianForm {
    /// `exp(-d / ℓ)` with the unsquared distance.
    #[default]
    Linear,
    /// Conventional `exp(-d² / (2ℓ²))`.
    Squared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub kernel: Kernel,
    /// Neighbour radius `D` in normalised units.
    pub radius: f64,
    /// Gaussian bandwidth `ℓ`; ignored by the flat kernel.
    pub bandwidth: f64,
    pub gaussian_form: GaussianForm,
    pub max_steps: usize,
    pub shift_tol: f64,
    pub merge_tol: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Gaussian,
            radius: 0.6,
            bandwidth: 0.2,
            gaussian_form: GaussianForm::Linear,
            max_steps: 500,
            shift_tol: 1e-4,
            merge_tol: 1e-2,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self, dim: usize) -> Result<(), ClusterError> {
        let max = (dim as f64).sqrt();
        if !(self.radius > 0.0 && self.radius <= max) {
            return Err(ClusterError::Radius {
                radius: self.radius,
                max,
            });
        }
        if !(self.bandwidth > 0.0) {
            return Err(ClusterError::NonPositive("bandwidth"));
        }
        if !(self.shift_tol > 0.0) {
            return Err(ClusterError::NonPositive("shift_tol"));
        }
        if !(self.merge_tol > 0.0) {
            return Err(ClusterError::NonPositive("merge_tol"));
        }
        if self.max_steps == 0 {
            return Err(ClusterError::NonPositive("max_steps"));
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, d: f64) -> f64 {
        match (self.kernel, self.gaussian_form) {
            (Kernel::Flat, _) => 1.0,
            (Kernel::Gaussian, GaussianForm::Linear) => (-d / self.bandwidth).exp(),
            (Kernel::Gaussian, GaussianForm::Squared) => {
                (-d * d / (2.0 * self.bandwidth * self.bandwidth)).exp()
            }
        }
    }
}

/// Points mapped into the unit cube, with the per-dimension affine maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub dim: usize,
    /// Row-major `K × J`.
    pub points: Vec<f64>,
    pub min: Vec<f64>,
    /// `max - min`; zero for collapsed dimensions.
    pub span: Vec<f64>,
}

impl Normalized {
    /// Maps a normalised point back to physical coordinates.
    pub fn to_physical(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.min.iter().zip(&self.span))
            .map(|(x, (lo, span))| if *span > 0.0 { lo + x * span } else { *lo })
            .collect()
    }
}

/// Min-max normalisation of row-major `K × J` points. Collapsed dimensions
/// (max = min) map to the constant 0.5.
pub fn normalize_points(points: &[f64], dim: usize) -> Normalized {
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for row in points.chunks_exact(dim) {
        for (j, &x) in row.iter().enumerate() {
            min[j] = min[j].min(x);
            max[j] = max[j].max(x);
        }
    }
    let span: Vec<f64> = min.iter().zip(&max).map(|(lo, hi)| hi - lo).collect();
    let mut out = Vec::with_capacity(points.len());
    for row in points.chunks_exact(dim) {
        for (j, &x) in row.iter().enumerate() {
            out.push(if span[j] > 0.0 { (x - min[j]) / span[j] } else { 0.5 });
        }
    }
    Normalized {
        dim,
        points: out,
        min,
        span,
    }
}

#[inline]
fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Outcome of the mode-seeking iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftModes {
    /// Row-major `K × J` converged modes, one per input point.
    pub modes: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

/// Kernel-weighted mean of `reference` around `at`, written to `out`.
/// Returns false for an empty neighbourhood.
fn shifted_mean(at: &[f64], reference: &[f64], dim: usize, config: &ClusterConfig, out: &mut [f64]) -> bool {
    // Past this squared distance a point is outside the radius even after
    // rounding, so the square root and the weight can be skipped.
    let far = config.radius * config.radius * (1.0 + 8.0 * f64::EPSILON);
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut total = 0.0;
    for x in reference.chunks_exact(dim) {
        let sq: f64 = at.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if sq > far {
            continue;
        }
        let d = sq.sqrt();
        if d <= config.radius {
            let w = config.weight(d);
            total += w;
            for (o, xi) in out.iter_mut().zip(x) {
                *o += w * xi;
            }
        }
    }
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
        true
    } else {
        false
    }
}

/// Runs synchronous mean-shift iterations on normalised points until every
/// mode moves less than `shift_tol` in one step, or `max_steps` is reached.
///
/// Neighbourhoods and weights are always taken against the original points.
pub fn mean_shift(points: &[f64], dim: usize, config: &ClusterConfig) -> MeanShiftModes {
    let mut modes = points.to_vec();
    let mut next = vec![0.0; points.len()];
    let mut steps = 0;
    let mut converged = false;
    while steps < config.max_steps {
        steps += 1;
        let mut max_shift: f64 = 0.0;
        for (out, at) in next.chunks_exact_mut(dim).zip(modes.chunks_exact(dim)) {
            if shifted_mean(at, points, dim, config, out) {
                max_shift = max_shift.max(distance(at, out));
            } else {
                out.copy_from_slice(at);
            }
        }
        std::mem::swap(&mut modes, &mut next);
        if max_shift < config.shift_tol {
            converged = true;
            break;
        }
    }
    MeanShiftModes {
        modes,
        steps,
        converged,
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage grouping of modes: two modes closer than `merge_tol` share
/// a cluster, transitively. Labels are dense and ordered by first occurrence.
pub fn assign_labels(modes: &[f64], dim: usize, merge_tol: f64) -> Vec<usize> {
    let n = modes.len() / dim;
    let rows: Vec<&[f64]> = modes.chunks_exact(dim).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for k in (i + 1)..n {
            if distance(rows[i], rows[k]) < merge_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, k));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut dense = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            if dense[root] == usize::MAX {
                dense[root] = next;
                next += 1;
            }
            dense[root]
        })
        .collect()
}

/// Population standard deviation per cluster and dimension, in the units of
/// `points`. Index `c` of the result belongs to label `c`.
pub fn cluster_sigmas(points: &[f64], dim: usize, labels: &[usize]) -> Vec<Vec<f64>> {
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let mut count = vec![0usize; n_clusters];
    let mut mean = vec![vec![0.0; dim]; n_clusters];
    for (row, &c) in points.chunks_exact(dim).zip(labels) {
        count[c] += 1;
        for (m, x) in mean[c].iter_mut().zip(row) {
            *m += x;
        }
    }
    for (m, &n) in mean.iter_mut().zip(&count) {
        m.iter_mut().for_each(|v| *v /= n.max(1) as f64);
    }
    let mut var = vec![vec![0.0; dim]; n_clusters];
    for (row, &c) in points.chunks_exact(dim).zip(labels) {
        for ((v, x), m) in var[c].iter_mut().zip(row).zip(&mean[c]) {
            *v += (x - m) * (x - m);
        }
    }
    var.into_iter()
        .zip(&count)
        .map(|(v, &n)| v.into_iter().map(|s| (s / n.max(1) as f64).sqrt()).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    /// Converged mode of each cluster, normalised coordinates.
    pub modes: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    /// Per-cluster standard deviation in physical units.
    pub sigma: Vec<Vec<f64>>,
    pub steps: usize,
    pub converged: bool,
}

impl ClusterResult {
    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }
}

/// Full pipeline: normalise, shift, merge, measure.
pub fn cluster(points: &[f64], dim: usize, config: &ClusterConfig) -> ClusterResult {
    let normalized = normalize_points(points, dim);
    let shifted = mean_shift(&normalized.points, dim, config);
    let labels = assign_labels(&shifted.modes, dim, config.merge_tol);
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; n_clusters];
    let mut modes = vec![Vec::new(); n_clusters];
    for (i, &c) in labels.iter().enumerate() {
        if sizes[c] == 0 {
            modes[c] = shifted.modes[i * dim..(i + 1) * dim].to_vec();
        }
        sizes[c] += 1;
    }
    ClusterResult {
        sigma: cluster_sigmas(points, dim, &labels),
        labels,
        modes,
        sizes,
        steps: shifted.steps,
        converged: shifted.converged,
    }
}

/// Mean-shift clustering as a search hook. Keeps the last result for
/// inspection.
#[derive(Debug, Clone, Default)]
pub struct MeanShift {
    pub config: ClusterConfig,
    pub invocations: u64,
    pub last: Option<ClusterResult>,
}

impl MeanShift {
    pub fn new(config: ClusterConfig) -> Self {
        Self {
            config,
            invocations: 0,
            last: None,
        }
    }
}

impl ClusterHook for MeanShift {
    fn cluster(&mut self, points: &[f64], dim: usize) -> Vec<usize> {
        self.invocations += 1;
        let result = cluster(points, dim, &self.config);
        let labels = result.labels.clone();
        self.last = Some(result);
        labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat(radius: f64) -> ClusterConfig {
        ClusterConfig {
            kernel: Kernel::Flat,
            radius,
            ..ClusterConfig::default()
        }
    }

    #[test]
    fn normalization_cases() {
        let n = normalize_points(&[0.0, 0.25, 1.0], 1);
        assert_eq!(n.points, vec![0.0, 0.25, 1.0]);
        let n = normalize_points(&[3.0, -7.0], 2);
        assert_eq!(n.points, vec![0.5, 0.5]);
        let n = normalize_points(&[2.0, 4.0, 6.0], 1);
        assert_eq!(n.points[1], 0.5);
        assert_eq!(n.to_physical(&[0.5]), vec![4.0]);
    }

    #[test]
    fn config_validation() {
        assert!(ClusterConfig::default().validate(1).is_ok());
        assert!(flat(1.5).validate(1).is_err());
        assert!(flat(2.0).validate(4).is_ok());
        assert!(flat(0.0).validate(2).is_err());
        let bad = ClusterConfig {
            bandwidth: 0.0,
            ..ClusterConfig::default()
        };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn single_point_is_its_own_mode() {
        let r = mean_shift(&[0.3, 0.7], 2, &ClusterConfig::default());
        assert_eq!(r.modes, vec![0.3, 0.7]);
        assert_eq!(r.steps, 1);
    }

    #[test]
    fn isolated_points_stay_apart() {
        let cfg = flat(0.3);
        let r = mean_shift(&[0.0, 1.0], 1, &cfg);
        assert_eq!(r.modes, vec![0.0, 1.0]);
        assert_eq!(assign_labels(&r.modes, 1, cfg.merge_tol), vec![0, 1]);
    }

    #[test]
    fn two_blobs_give_two_modes() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let off = (f64::from(i) - 9.5) * 0.002;
            pts.push(0.1 + off);
            pts.push(0.9 + off);
        }
        let cfg = ClusterConfig {
            radius: 0.3,
            ..ClusterConfig::default()
        };
        let res = cluster(&pts, 1, &cfg);
        assert_eq!(res.n_clusters(), 2);
        assert_eq!(res.sizes, vec![20, 20]);
        // blob centers sit at 0.1 and 0.9 in physical = normalised space up to the affine map
        let norm = normalize_points(&pts, 1);
        let centers: Vec<f64> = res.modes.iter().map(|m| norm.to_physical(m)[0]).collect();
        assert_abs_diff_eq!(centers[0], 0.1, epsilon = 0.02);
        assert_abs_diff_eq!(centers[1], 0.9, epsilon = 0.02);
    }

    #[test]
    fn label_merging() {
        assert_eq!(assign_labels(&[0.4, 0.4, 0.4], 1, 0.01), vec![0, 0, 0]);
        assert_eq!(assign_labels(&[0.1, 0.9, 0.1], 1, 0.05), vec![0, 1, 0]);
        let chain: Vec<f64> = (0..10).map(|i| f64::from(i) * 0.9 * 0.05).collect();
        assert!(assign_labels(&chain, 1, 0.05).iter().all(|&l| l == 0));
    }

    #[test]
    fn sigma_cases() {
        let pts = [0.0, 2.0, 10.0];
        let whole = cluster_sigmas(&pts, 1, &[0, 0, 0]);
        let mean = 4.0;
        let global = (pts.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0).sqrt();
        assert_abs_diff_eq!(whole[0][0], global, epsilon = 1e-12);
        let split = cluster_sigmas(&pts, 1, &[0, 0, 1]);
        assert_eq!(split[1], vec![0.0]);
        assert_abs_diff_eq!(split[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wide_flat_kernel_gives_one_cluster() {
        let pts = [0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.3, 0.8];
        let res = cluster(&pts, 2, &flat(2f64.sqrt()));
        assert_eq!(res.n_clusters(), 1);
    }

    #[test]
    fn gaussian_update_single_neighbour_fixed_point() {
        let cfg = ClusterConfig {
            radius: 0.1,
            ..ClusterConfig::default()
        };
        let mut out = [0.0; 2];
        assert!(shifted_mean(&[0.2, 0.2], &[0.2, 0.2, 0.9, 0.9], 2, &cfg, &mut out));
        assert_eq!(out, [0.2, 0.2]);
    }
}
