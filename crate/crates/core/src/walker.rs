//! Replacement search for the nested-sampling loop.
//!
//! A new live point is found with a bounded random walk (the "lawn mower
//! robot") started from a random live point. Each step moves every
//! coordinate by `f · r_j · σ_j` with `r_j ~ U[-1, 1]` and is kept only if
//! the likelihood stays above the current threshold. When a walk burns
//! through `N_t` tries, one of two rescue strategies picks a new start:
//! a point between the last failure and the live barycenter, or a point
//! stitched together from coordinates of random live points. After `NN_t`
//! consecutive failed walks the live points are clustered and walks use
//! the standard deviation of their own cluster.

use rand::Rng;
use thiserror::Error;

use crate::model::{LogLikelihood, ModelError, ParameterSpace};

/// Running first and second moments of a point set, relative to an origin
/// to limit cancellation.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    origin: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(origin: &[f64]) -> Self {
        Self {
            count: 0,
            origin: origin.to_vec(),
            sum: vec![0.0; origin.len()],
            sum_sq: vec![0.0; origin.len()],
        }
    }

    fn add(&mut self, p: &[f64]) {
        self.count += 1;
        for (j, (x, o)) in p.iter().zip(&self.origin).enumerate() {
            let d = x - o;
            self.sum[j] += d;
            self.sum_sq[j] += d * d;
        }
    }

    fn remove(&mut self, p: &[f64]) {
        self.count -= 1;
        for (j, (x, o)) in p.iter().zip(&self.origin).enumerate() {
            let d = x - o;
            self.sum[j] -= d;
            self.sum_sq[j] -= d * d;
        }
    }

    fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum.iter().zip(&self.origin).map(|(s, o)| o + s / n).collect()
    }

    fn sigma(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                let m = s / n;
                (q / n - m * m).max(0.0).sqrt()
            })
            .collect()
    }
}

/// The current live points with their log-likelihoods, global and
/// per-cluster spread, and optional cluster labels.
#[derive(Debug, Clone)]
pub struct LivePointSet {
    dim: usize,
    points: Vec<f64>,
    log_ls: Vec<f64>,
    global: Moments,
    labels: Option<Vec<usize>>,
    clusters: Vec<Moments>,
    since_refresh: usize,
}

impl LivePointSet {
    /// `points` is row-major `K × J`.
    pub fn new(dim: usize, points: Vec<f64>, log_ls: Vec<f64>) -> Self {
        assert!(dim > 0 && points.len() == dim * log_ls.len() && !log_ls.is_empty());
        let mut set = Self {
            dim,
            global: Moments::new(&points[..dim]),
            points,
            log_ls,
            labels: None,
            clusters: Vec::new(),
            since_refresh: 0,
        };
        set.refresh();
        set
    }

    fn refresh(&mut self) {
        let dim = self.dim;
        self.global = Moments::new(&self.points[..dim]);
        for p in self.points.chunks_exact(dim) {
            self.global.add(p);
        }
        if let Some(labels) = &self.labels {
            let n = labels.iter().max().map_or(0, |m| m + 1);
            self.clusters = vec![Moments::new(&self.points[..dim]); n];
            for (p, &c) in self.points.chunks_exact(dim).zip(labels) {
                if self.clusters[c].count == 0 {
                    self.clusters[c].origin = p.to_vec();
                }
                self.clusters[c].add(p);
            }
        }
        self.since_refresh = 0;
    }

    pub fn len(&self) -> usize {
        self.log_ls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_ls.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn log_l(&self, k: usize) -> f64 {
        self.log_ls[k]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn log_ls(&self) -> &[f64] {
        &self.log_ls
    }

    /// Population standard deviation of the live points per dimension.
    pub fn sigma(&self) -> Vec<f64> {
        self.global.sigma()
    }

    pub fn barycenter(&self) -> Vec<f64> {
        self.global.mean()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label_of(&self, k: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[k])
    }

    pub fn set_labels(&mut self, labels: Vec<usize>) {
        assert_eq!(labels.len(), self.len());
        self.labels = Some(labels);
        self.refresh();
    }

    pub fn clear_labels(&mut self) {
        self.labels = None;
        self.clusters.clear();
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.iter().filter(|c| c.count > 0).count()
    }

    /// Standard deviation of one cluster's members.
    pub fn cluster_sigma(&self, label: usize) -> Option<Vec<f64>> {
        self.clusters.get(label).filter(|c| c.count > 0).map(Moments::sigma)
    }

    /// Step scale for a walk from a point in `label`: the cluster spread when
    /// it is usable, the global spread otherwise. Singleton or collapsed
    /// clusters would freeze the walk, so they fall back to the global value.
    pub fn walk_sigma(&self, label: Option<usize>) -> Vec<f64> {
        if let Some(c) = label.and_then(|l| self.clusters.get(l)) {
            if c.count >= 2 {
                let s = c.sigma();
                if s.iter().all(|&v| v > 0.0) {
                    return s;
                }
            }
        }
        self.sigma()
    }

    /// Index of the lowest log-likelihood (first on ties).
    pub fn worst(&self) -> usize {
        let mut best = 0;
        for (k, &l) in self.log_ls.iter().enumerate() {
            if l < self.log_ls[best] {
                best = k;
            }
        }
        best
    }

    /// Largest log-likelihood, optionally skipping one index.
    pub fn max_log_l(&self, skip: Option<usize>) -> f64 {
        self.log_ls
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, &l)| l)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Live point closest to `point` in σ-scaled distance, skipping `skip`.
    pub fn nearest(&self, point: &[f64], skip: Option<usize>) -> usize {
        let scale: Vec<f64> = self
            .sigma()
            .into_iter()
            .map(|s| if s > 0.0 { 1.0 / (s * s) } else { 1.0 })
            .collect();
        let mut best = (usize::MAX, f64::INFINITY);
        for (k, p) in self.points.chunks_exact(self.dim).enumerate() {
            if Some(k) == skip {
                continue;
            }
            let d: f64 = p
                .iter()
                .zip(point)
                .zip(&scale)
                .map(|((a, b), w)| (a - b) * (a - b) * w)
                .sum();
            if d < best.1 {
                best = (k, d);
            }
        }
        if best.0 == usize::MAX {
            0
        } else {
            best.0
        }
    }

    /// Replaces live point `k` in place, keeping the running moments current.
    pub fn replace(&mut self, k: usize, point: &[f64], log_l: f64, label: Option<usize>) {
        let dim = self.dim;
        let old = self.points[k * dim..(k + 1) * dim].to_vec();
        self.global.remove(&old);
        self.global.add(point);
        if let Some(labels) = self.labels.as_mut() {
            let new_label = label.unwrap_or(labels[k]);
            self.clusters[labels[k]].remove(&old);
            self.clusters[new_label].add(point);
            labels[k] = new_label;
        }
        self.points[k * dim..(k + 1) * dim].copy_from_slice(point);
        self.log_ls[k] = log_l;
        self.since_refresh += 1;
        if self.since_refresh >= self.len() {
            self.refresh();
        }
    }

    /// Uniform random index other than `skip` (or any index when K = 1).
    fn random_index<R: Rng + ?Sized>(&self, skip: Option<usize>, rng: &mut R) -> usize {
        match skip {
            Some(s) if self.len() > 1 => {
                let k = rng.random_range(0..self.len() - 1);
                if k >= s {
                    k + 1
                } else {
                    k
                }
            }
            _ => rng.random_range(0..self.len()),
        }
    }
}

/// Something able to partition the live points. Implemented by
/// [`crate::cluster::MeanShift`]; [`NoClustering`] switches the feature off.
pub trait ClusterHook {
    fn enabled(&self) -> bool {
        true
    }

    /// Labels for the row-major `K × J` points.
    fn cluster(&mut self, points: &[f64], dim: usize) -> Vec<usize>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoClustering;

impl ClusterHook for NoClustering {
    fn enabled(&self) -> bool {
        false
    }

    fn cluster(&mut self, points: &[f64], dim: usize) -> Vec<usize> {
        vec![0; points.len() / dim]
    }
}

/// Tunables of the replacement search.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    /// Accepted steps per walk, `N`.
    pub steps: usize,
    /// Step factor `f`.
    pub step_factor: f64,
    /// Tries per walk before a rescue strategy, `N_t`.
    pub max_tries: usize,
    /// Failed walks before clustering, `NN_t`.
    pub max_cycles: usize,
    /// The search gives up after `budget_factor · N_t · NN_t` walk tries.
    pub budget_factor: usize,
    pub rescue: RescuePolicy,
}

/// What happens to a rescue candidate that satisfies the constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RescuePolicy {
    /// A fresh walk of `N` steps starts from it.
    #[default]
    Reseed,
    /// It is returned as the replacement point. Synthesised points are not
    /// draws from the constrained prior, so on multimodal problems this
    /// biases ln E upwards.
    Accept,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            step_factor: 0.2,
            max_tries: 200,
            max_cycles: 2,
            budget_factor: 100,
            rescue: RescuePolicy::Reseed,
        }
    }
}

impl WalkConfig {
    pub fn try_budget(&self) -> u64 {
        (self.budget_factor * self.max_tries * self.max_cycles) as u64
    }

    /// Warning text when `f · N < 1`: the walk then cannot travel about one
    /// standard deviation from its start.
    pub fn tuning_warning(&self) -> Option<String> {
        let reach = self.step_factor * self.steps as f64;
        (reach < 1.0).then(|| {
            format!(
                "f·N < 1 (f = {}, N = {}, f·N = {reach}); walks explore less than one standard deviation",
                self.step_factor, self.steps
            )
        })
    }
}

/// Draws `current + f · r ∘ σ` with `r_j ~ U[-1, 1]` into `out`.
pub fn propose_step<R: Rng + ?Sized>(current: &[f64], step_factor: f64, sigma: &[f64], rng: &mut R, out: &mut [f64]) {
    for ((o, x), s) in out.iter_mut().zip(current).zip(sigma) {
        let r: f64 = rng.random_range(-1.0..=1.0);
        *o = x + step_factor * r * s;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WalkEnd {
    Accepted { point: Vec<f64>, log_l: f64, tries: u64 },
    /// `last_failed` is the last rejected candidate.
    Exhausted { last_failed: Vec<f64>, tries: u64 },
}

/// Bounded random walk under the hard constraint `logL > threshold`.
///
/// Performs `steps` accepted moves; each rejected or out-of-box proposal is a
/// failed try and is redrawn from the same position. Gives up after
/// `try_budget` proposals in total.
#[allow(clippy::too_many_arguments)]
pub fn lawn_mower_walk<L, R>(
    start: &[f64],
    start_log_l: f64,
    threshold: f64,
    steps: usize,
    step_factor: f64,
    sigma: &[f64],
    likelihood: &L,
    space: &ParameterSpace,
    try_budget: u64,
    rng: &mut R,
) -> Result<WalkEnd, ModelError>
where
    L: LogLikelihood + ?Sized,
    R: Rng + ?Sized,
{
    let mut current = start.to_vec();
    let mut current_log_l = start_log_l;
    let mut candidate = vec![0.0; start.len()];
    let mut accepted = 0;
    let mut tries = 0;
    while accepted < steps {
        if tries >= try_budget {
            return Ok(WalkEnd::Exhausted {
                last_failed: candidate,
                tries,
            });
        }
        tries += 1;
        propose_step(&current, step_factor, sigma, rng, &mut candidate);
        if !space.contains(&candidate) {
            continue;
        }
        let log_l = likelihood.log_likelihood(&candidate)?;
        if log_l > threshold {
            current.copy_from_slice(&candidate);
            current_log_l = log_l;
            accepted += 1;
        }
    }
    Ok(WalkEnd::Accepted {
        point: current,
        log_l: current_log_l,
        tries,
    })
}

/// Uniform point on the segment from `barycenter` to `failed`.
pub fn strategy_recenter<R: Rng + ?Sized>(failed: &[f64], barycenter: &[f64], rng: &mut R) -> Vec<f64> {
    let u: f64 = rng.random();
    segment_point(failed, barycenter, u)
}

/// `barycenter + u · (failed − barycenter)`.
pub fn segment_point(failed: &[f64], barycenter: &[f64], u: f64) -> Vec<f64> {
    barycenter
        .iter()
        .zip(failed)
        .map(|(b, f)| b + u * (f - b))
        .collect()
}

/// Point whose `j`-th coordinate is copied from an independently chosen
/// live point (never `skip`).
pub fn strategy_synthesize<R: Rng + ?Sized>(live: &LivePointSet, skip: Option<usize>, rng: &mut R) -> Vec<f64> {
    (0..live.dim())
        .map(|j| live.point(live.random_index(skip, rng))[j])
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StrategyEvents {
    pub recenter: u64,
    pub synthesize: u64,
    pub cluster: u64,
}

impl std::ops::AddAssign for StrategyEvents {
    fn add_assign(&mut self, rhs: Self) {
        self.recenter += rhs.recenter;
        self.synthesize += rhs.synthesize;
        self.cluster += rhs.cluster;
    }
}

/// An accepted replacement point.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub point: Vec<f64>,
    pub log_l: f64,
    /// Cluster the point was grown in, when labels exist.
    pub label: Option<usize>,
    /// Walk proposals plus rescue-candidate evaluations.
    pub tries: u64,
    pub walk_tries: u64,
    pub events: StrategyEvents,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no replacement found after {walk_tries} walk tries ({} clusterings)", events.cluster)]
    Budget {
        walk_tries: u64,
        tries: u64,
        events: StrategyEvents,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Finds a replacement for live point `exclude`, whose log-likelihood is the
/// current `threshold`. The returned point satisfies `logL > threshold` and
/// lies inside `space`.
#[allow(clippy::too_many_arguments)]
pub fn find_new_point<L, R>(
    live: &mut LivePointSet,
    exclude: usize,
    threshold: f64,
    likelihood: &L,
    space: &ParameterSpace,
    config: &WalkConfig,
    hook: &mut dyn ClusterHook,
    rng: &mut R,
) -> Result<WalkOutcome, SearchError>
where
    L: LogLikelihood + ?Sized,
    R: Rng + ?Sized,
{
    let budget = config.try_budget();
    let mut events = StrategyEvents::default();
    let mut walk_tries = 0u64;
    let mut rescue_tries = 0u64;
    let mut cycles = 0;

    let pick_start = |live: &LivePointSet, rng: &mut R| {
        let k = live.random_index(Some(exclude), rng);
        (live.point(k).to_vec(), live.log_l(k), live.label_of(k))
    };
    let (mut start, mut start_log_l, mut label) = pick_start(live, rng);

    loop {
        let sigma = live.walk_sigma(label);
        let end = lawn_mower_walk(
            &start,
            start_log_l,
            threshold,
            config.steps,
            config.step_factor,
            &sigma,
            likelihood,
            space,
            config.max_tries as u64,
            rng,
        )?;
        let last_failed = match end {
            WalkEnd::Accepted { point, log_l, tries } => {
                walk_tries += tries;
                return Ok(WalkOutcome {
                    point,
                    log_l,
                    label,
                    tries: walk_tries + rescue_tries,
                    walk_tries,
                    events,
                });
            }
            WalkEnd::Exhausted { last_failed, tries } => {
                walk_tries += tries;
                last_failed
            }
        };
        cycles += 1;

        if hook.enabled() && cycles >= config.max_cycles {
            cycles = 0;
            events.cluster += 1;
            let labels = hook.cluster(live.points(), live.dim());
            live.set_labels(labels);
            (start, start_log_l, label) = pick_start(live, rng);
        } else {
            let candidate = if rng.random_bool(0.5) {
                events.recenter += 1;
                strategy_recenter(&last_failed, &live.barycenter(), rng)
            } else {
                events.synthesize += 1;
                strategy_synthesize(live, Some(exclude), rng)
            };
            let mut reseeded = false;
            if space.contains(&candidate) {
                rescue_tries += 1;
                let log_l = likelihood.log_likelihood(&candidate)?;
                if log_l > threshold {
                    let near = live.labels().map(|l| l[live.nearest(&candidate, Some(exclude))]);
                    if config.rescue == RescuePolicy::Accept {
                        return Ok(WalkOutcome {
                            point: candidate,
                            log_l,
                            label: near,
                            tries: walk_tries + rescue_tries,
                            walk_tries,
                            events,
                        });
                    }
                    label = near;
                    start = candidate;
                    start_log_l = log_l;
                    reseeded = true;
                }
            }
            if !reseeded {
                (start, start_log_l, label) = pick_start(live, rng);
            }
        }

        if walk_tries >= budget {
            return Err(SearchError::Budget {
                walk_tries,
                tries: walk_tries + rescue_tries,
                events,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn gauss1d(p: &[f64]) -> f64 {
        -0.5 * p[0] * p[0]
    }

    fn line_set(values: &[f64]) -> LivePointSet {
        LivePointSet::new(1, values.to_vec(), values.iter().map(|v| gauss1d(&[*v])).collect())
    }

    #[test]
    fn zero_step_cases() {
        let mut out = [0.0; 3];
        propose_step(&[1.0, 2.0, 3.0], 0.0, &[1.0, 1.0, 1.0], &mut rng(1), &mut out);
        assert_eq!(out, [1.0, 2.0, 3.0]);
        propose_step(&[1.0, 2.0, 3.0], 0.5, &[0.0, 0.0, 0.0], &mut rng(1), &mut out);
        assert_eq!(out, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn step_law_bounded_and_centered() {
        let mut r = rng(7);
        let sigma = [2.0, 0.5];
        let f = 0.3;
        let n = 100_000;
        let mut out = [0.0; 2];
        let mut sums = [0.0; 2];
        for _ in 0..n {
            propose_step(&[0.0, 0.0], f, &sigma, &mut r, &mut out);
            for j in 0..2 {
                assert!(out[j].abs() <= f * sigma[j]);
                sums[j] += out[j];
            }
        }
        for j in 0..2 {
            // uniform on [-a, a]: sd a/√3, standard error a/√(3n)
            let se = f * sigma[j] / (3.0 * n as f64).sqrt();
            assert!((sums[j] / n as f64).abs() < 4.0 * se);
        }
    }

    #[test]
    fn unconstrained_walk_takes_exactly_n_steps() {
        let space = ParameterSpace::from_bounds(&[(-100.0, 100.0)]).unwrap();
        let end = lawn_mower_walk(&[0.0], 0.0, f64::NEG_INFINITY, 25, 0.1, &[1.0], &gauss1d, &space, 1000, &mut rng(2)).unwrap();
        match end {
            WalkEnd::Accepted { tries, .. } => assert_eq!(tries, 25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn impossible_constraint_exhausts() {
        let space = ParameterSpace::from_bounds(&[(-5.0, 5.0)]).unwrap();
        let end = lawn_mower_walk(&[0.0], 0.0, 1.0, 10, 0.5, &[1.0], &gauss1d, &space, 300, &mut rng(2)).unwrap();
        assert!(matches!(end, WalkEnd::Exhausted { tries: 300, .. }));
    }

    #[test]
    fn constrained_walk_covers_both_sides() {
        let space = ParameterSpace::from_bounds(&[(-5.0, 5.0)]).unwrap();
        let threshold = -0.5; // 1σ contour
        let mut r = rng(3);
        let (mut left, mut right) = (0, 0);
        for _ in 0..1000 {
            let end = lawn_mower_walk(&[0.0], 0.0, threshold, 20, 0.2, &[0.6], &gauss1d, &space, 10_000, &mut r).unwrap();
            let WalkEnd::Accepted { point, log_l, .. } = end else { panic!() };
            assert!(log_l > threshold && point[0].abs() < 1.0);
            if point[0] < 0.0 {
                left += 1;
            } else {
                right += 1;
            }
        }
        assert!(left > 300 && right > 300, "{left} {right}");
    }

    #[test]
    fn recenter_segment() {
        let b = [1.0, -2.0, 3.0];
        assert_eq!(strategy_recenter(&b, &b, &mut rng(1)), b.to_vec());
        let f = [4.0, 0.0, -1.0];
        assert_eq!(segment_point(&f, &b, 0.0), b.to_vec());
        assert_eq!(segment_point(&f, &b, 1.0), f.to_vec());
        let mut r = rng(9);
        let dir: Vec<f64> = f.iter().zip(&b).map(|(x, y)| x - y).collect();
        for _ in 0..1000 {
            let c = strategy_recenter(&f, &b, &mut r);
            let v: Vec<f64> = c.iter().zip(&b).map(|(x, y)| x - y).collect();
            // cross product with the segment direction vanishes
            let cross = [
                v[1] * dir[2] - v[2] * dir[1],
                v[2] * dir[0] - v[0] * dir[2],
                v[0] * dir[1] - v[1] * dir[0],
            ];
            assert!(cross.iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn synthesize_membership() {
        let single = LivePointSet::new(2, vec![0.3, 0.4], vec![0.0]);
        assert_eq!(strategy_synthesize(&single, None, &mut rng(1)), vec![0.3, 0.4]);
        let set = LivePointSet::new(3, (0..30).map(f64::from).collect(), vec![0.0; 10]);
        let mut r = rng(5);
        for _ in 0..200 {
            let c = strategy_synthesize(&set, Some(4), &mut r);
            for (j, v) in c.iter().enumerate() {
                let k = (*v as usize - j) / 3;
                assert_eq!(set.point(k)[j], *v);
                assert_ne!(k, 4);
            }
        }
    }

    #[test]
    fn synthesize_combinations_uniform() {
        // K = 2, J = 2: four combinations, multinomial oracle p = 1/4 each
        let set = LivePointSet::new(2, vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0]);
        let mut r = rng(21);
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let c = strategy_synthesize(&set, None, &mut r);
            counts[(c[0] as usize) * 2 + c[1] as usize] += 1;
        }
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn live_set_moments_track_replacements() {
        let mut set = line_set(&[-1.0, 0.0, 1.0, 2.0]);
        set.replace(0, &[5.0], gauss1d(&[5.0]), None);
        let pts = [5.0, 0.0, 1.0, 2.0];
        let mean = pts.iter().sum::<f64>() / 4.0;
        let sd = (pts.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0).sqrt();
        assert!((set.barycenter()[0] - mean).abs() < 1e-12);
        assert!((set.sigma()[0] - sd).abs() < 1e-12);
        assert_eq!(set.worst(), 0);
    }

    #[test]
    fn cluster_sigma_smaller_than_global() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let off = f64::from(i) * 0.01;
            pts.extend_from_slice(&[-3.0 + off, off]);
            labels.push(0);
            pts.extend_from_slice(&[3.0 + off, off]);
            labels.push(1);
        }
        let mut set = LivePointSet::new(2, pts, vec![0.0; 40]);
        set.set_labels(labels);
        let global = set.sigma();
        for c in 0..2 {
            let s = set.cluster_sigma(c).unwrap();
            assert!(s[0] < global[0]);
            assert_eq!(set.walk_sigma(Some(c)), s);
        }
    }

    #[test]
    fn singleton_cluster_falls_back_to_global_sigma() {
        let mut set = line_set(&[0.0, 1.0, 2.0]);
        set.set_labels(vec![0, 0, 1]);
        assert_eq!(set.walk_sigma(Some(1)), set.sigma());
    }

    #[test]
    fn unconstrained_search_needs_no_rescue() {
        let space = ParameterSpace::from_bounds(&[(-10.0, 10.0)]).unwrap();
        let mut set = line_set(&[-1.0, -0.5, 0.5, 1.0]);
        let out = find_new_point(
            &mut set,
            0,
            f64::NEG_INFINITY,
            &gauss1d,
            &space,
            &WalkConfig::default(),
            &mut NoClustering,
            &mut rng(4),
        )
        .unwrap();
        assert_eq!(out.events, StrategyEvents::default());
        assert_eq!(out.walk_tries, 20);
    }

    struct Counting(u64);

    impl ClusterHook for Counting {
        fn cluster(&mut self, points: &[f64], dim: usize) -> Vec<usize> {
            self.0 += 1;
            vec![0; points.len() / dim]
        }
    }

    #[test]
    fn clustering_triggered_after_nt_times_nnt_tries() {
        let space = ParameterSpace::from_bounds(&[(-10.0, 10.0)]).unwrap();
        let mut set = line_set(&[-1.0, -0.5, 0.5, 1.0]);
        let config = WalkConfig {
            steps: 5,
            step_factor: 0.2,
            max_tries: 50,
            max_cycles: 3,
            budget_factor: 1,
            rescue: RescuePolicy::Reseed,
        };
        let mut hook = Counting(0);
        let err = find_new_point(&mut set, 0, 1.0, &gauss1d, &space, &config, &mut hook, &mut rng(4)).unwrap_err();
        let SearchError::Budget { walk_tries, events, .. } = err else { panic!() };
        assert_eq!(walk_tries, 150);
        assert_eq!(hook.0, 1);
        assert_eq!(events.cluster, 1);
        assert_eq!(events.recenter + events.synthesize, 2);

        let mut hook = Counting(0);
        let config = WalkConfig { budget_factor: 4, ..config };
        let err = find_new_point(&mut set, 0, 1.0, &gauss1d, &space, &config, &mut hook, &mut rng(4)).unwrap_err();
        assert!(matches!(err, SearchError::Budget { walk_tries: 600, .. }));
        assert_eq!(hook.0, 4);
    }

    #[test]
    fn tuning_warning_contract() {
        let w = WalkConfig {
            steps: 10,
            step_factor: 0.05,
            ..WalkConfig::default()
        };
        assert!(w.tuning_warning().unwrap().contains("f·N < 1"));
        assert!(WalkConfig::default().tuning_warning().is_none());
    }
}
