//! The nested-sampling loop: evidence quadrature over deterministic prior
//! volume shrinkage, information gain, and aggregation of repeated runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cluster::{ClusterConfig, MeanShift};
use crate::model::{LogLikelihood, ModelError, ParameterSpace};
use crate::timing::ThreadCpuTimer;
use crate::walker::{find_new_point, ClusterHook, LivePointSet, NoClustering, SearchError, StrategyEvents, WalkConfig};

/// `ln Σ exp(v)`, exact for empty input (−∞) and stable for large |v|.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(e^a − e^b)` for `a ≥ b`.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Expected log prior volume after `m` discards with `k` live points:
/// the volume shrinks on average by `e^{-1/K}` per iteration.
pub fn shrinkage_log_volume(m: usize, k: usize) -> f64 {
    -(m as f64) / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// `ΔX_m = X_{m-1} − X_m`.
    Rectangle,
    /// `ΔX_m = (X_{m-1} − X_{m+1}) / 2`.
    #[default]
    Trapezoid,
}

/// The live points left at termination, integrated as one block of prior
/// volume `X_final` at their mean likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiveRemainder {
    pub log_volume: f64,
    pub log_mean_l: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("log prior volumes must start below 0 and decrease strictly (sample {index})")]
    UnorderedChain { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub log_evidence: f64,
    /// `ln ΔX_m` per chain element.
    pub log_dx: Vec<f64>,
}

/// Evidence quadrature over a chain of `(ln L_m, ln X_m)` pairs.
///
/// With the trapezoid rule the top segment `[X_1, 1]` is assigned to the
/// first sample and `X_{M+1}` is taken as `X_M`, the boundary of the live
/// remainder, so the volume elements plus the remainder always sum to one.
pub fn accumulate_evidence(
    chain: &[(f64, f64)],
    rule: Quadrature,
    remainder: Option<LiveRemainder>,
) -> Result<Evidence, EvidenceError> {
    let mut prev = 0.0;
    for (index, &(_, log_x)) in chain.iter().enumerate() {
        if !(log_x < prev) {
            return Err(EvidenceError::UnorderedChain { index });
        }
        prev = log_x;
    }
    let n = chain.len();
    let log_x = |m: usize| -> f64 {
        // X_0 = 1, X_{M+1} = X_M
        match m {
            0 => 0.0,
            m if m > n => chain[n - 1].1,
            m => chain[m - 1].1,
        }
    };
    let log_dx: Vec<f64> = (1..=n)
        .map(|m| match rule {
            Quadrature::Rectangle => log_diff_exp(log_x(m - 1), log_x(m)),
            Quadrature::Trapezoid => {
                let half = log_diff_exp(log_x(m - 1), log_x(m + 1)) - std::f64::consts::LN_2;
                if m == 1 {
                    log_add_exp(half, log_diff_exp(0.0, log_x(1)) - std::f64::consts::LN_2)
                } else {
                    half
                }
            }
        })
        .collect();
    let terms = chain
        .iter()
        .zip(&log_dx)
        .map(|((log_l, _), dx)| log_l + dx)
        .chain(remainder.map(|r| r.log_volume + r.log_mean_l));
    Ok(Evidence {
        log_evidence: log_sum_exp(terms),
        log_dx,
    })
}

/// Kullback–Leibler divergence from prior to posterior, in nats, from
/// `(ln L, ln w)` pairs. Negative round-off is clipped to zero.
pub fn information_gain<I>(samples: I, log_evidence: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let h: f64 = samples
        .into_iter()
        .filter(|(log_l, _)| log_l.is_finite())
        .map(|(log_l, log_w)| (log_w - log_evidence).exp() * (log_l - log_evidence))
        .sum();
    h.max(0.0)
}

/// `−2 (⟨ln L⟩_posterior − ln L_max)` from `(ln L, ln w)` pairs, clipped
/// at 0 against round-off.
pub fn bayesian_complexity<I>(samples: I, log_evidence: f64, log_l_max: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mean: f64 = samples
        .into_iter()
        .filter(|(log_l, _)| log_l.is_finite())
        .map(|(log_l, log_w)| (log_w - log_evidence).exp() * log_l)
        .sum();
    (-2.0 * (mean - log_l_max)).max(0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{name} = {value} violates {rule}")]
    Invalid {
        name: &'static str,
        value: String,
        rule: &'static str,
    },
}

fn invalid(name: &'static str, value: impl ToString, rule: &'static str) -> ConfigError {
    ConfigError::Invalid {
        name,
        value: value.to_string(),
        rule,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Number of live points `K`.
    pub live_points: usize,
    pub walk: WalkConfig,
    pub quadrature: Quadrature,
    /// Stop once the largest possible remaining contribution is below this
    /// fraction of the accumulated evidence.
    pub term_eps: f64,
    pub max_iter: usize,
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            live_points: 1000,
            walk: WalkConfig::default(),
            quadrature: Quadrature::Trapezoid,
            term_eps: 1e-5,
            max_iter: 10_000_000,
            n_runs: 16,
            seed: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.live_points < 2 {
            return Err(invalid("live_points", self.live_points, "K >= 2"));
        }
        if self.walk.steps < 1 {
            return Err(invalid("walk_steps", self.walk.steps, "N >= 1"));
        }
        if !(self.walk.step_factor > 0.0) || !self.walk.step_factor.is_finite() {
            return Err(invalid("step_factor", self.walk.step_factor, "f > 0"));
        }
        if self.walk.max_tries < 1 {
            return Err(invalid("max_tries", self.walk.max_tries, "N_t >= 1"));
        }
        if self.walk.max_cycles < 1 {
            return Err(invalid("max_cycles", self.walk.max_cycles, "NN_t >= 1"));
        }
        if self.walk.budget_factor < 1 {
            return Err(invalid("budget_factor", self.walk.budget_factor, ">= 1"));
        }
        if !(self.term_eps > 0.0) {
            return Err(invalid("term_eps", self.term_eps, "term_eps > 0"));
        }
        if self.max_iter < 1 {
            return Err(invalid("max_iter", self.max_iter, ">= 1"));
        }
        if self.n_runs < 1 {
            return Err(invalid("runs", self.n_runs, ">= 1"));
        }
        Ok(())
    }
}

/// One discarded live point.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscardedSample {
    pub params: Vec<f64>,
    pub log_l: f64,
    pub log_x: f64,
    pub log_dx: f64,
    /// `ln L + ln ΔX`.
    pub log_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Remaining evidence below tolerance.
    Converged,
    /// Every remaining live point sits at the threshold; nothing can beat it.
    Plateau,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedRun {
    pub log_evidence: f64,
    /// Number of terms summed into `log_evidence`.
    pub log_evidence_terms: usize,
    /// Information gain in nats.
    pub information: f64,
    pub complexity: f64,
    /// Discarded points in order.
    pub samples: Vec<DiscardedSample>,
    /// Live points left at termination, as pseudo-samples sharing `X_final`.
    pub remainder: Vec<DiscardedSample>,
    pub iterations: usize,
    pub cluster_invocations: u64,
    pub total_tries: u64,
    pub events: StrategyEvents,
    pub termination: Termination,
    /// Accepted replacements that broke `logL > threshold` or left the prior
    /// box. Always zero; kept as instrumentation.
    pub constraint_violations: u64,
    pub seed: u64,
    pub cpu_seconds: f64,
}

impl NestedRun {
    /// Discarded samples followed by the remainder pseudo-samples.
    pub fn all_samples(&self) -> impl Iterator<Item = &DiscardedSample> {
        self.samples.iter().chain(&self.remainder)
    }

    pub fn max_log_l(&self) -> f64 {
        self.all_samples().map(|s| s.log_l).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `√(H / K)`, the usual estimate of the ln E scatter.
    pub fn expected_log_evidence_error(&self, live_points: usize) -> f64 {
        (self.information / live_points as f64).sqrt()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("could not draw {needed} initial live points with finite likelihood in {attempts} attempts")]
    Initialization { needed: usize, attempts: usize },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// A run that aborted, with its diagnostic counters.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("run with seed {seed} aborted after {iterations} iterations: {error}")]
pub struct RunFailure {
    pub error: RunError,
    pub iterations: usize,
    pub total_tries: u64,
    pub cluster_invocations: u64,
    pub seed: u64,
}

/// Runs one nested-sampling analysis.
pub fn run_nested<L>(
    likelihood: &L,
    space: &ParameterSpace,
    config: &SamplerConfig,
    hook: &mut dyn ClusterHook,
    seed: u64,
) -> Result<NestedRun, RunFailure>
where
    L: LogLikelihood + ?Sized,
{
    let timer = ThreadCpuTimer::start();
    let mut iterations = 0;
    let mut total_tries = 0u64;
    let mut events = StrategyEvents::default();
    let fail = |error: RunError, iterations, total_tries, events: StrategyEvents| RunFailure {
        error,
        iterations,
        total_tries,
        cluster_invocations: events.cluster,
        seed,
    };
    config.validate().map_err(|e| fail(e.into(), 0, 0, events))?;

    let k = config.live_points;
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let max_attempts = 1000 * k;
    let mut points = Vec::with_capacity(k * dim);
    let mut log_ls = Vec::with_capacity(k);
    let mut attempts = 0;
    while log_ls.len() < k {
        if attempts == max_attempts {
            let error = RunError::Initialization {
                needed: k,
                attempts,
            };
            return Err(fail(error, 0, attempts as u64, events));
        }
        attempts += 1;
        let p = space.sample_prior(&mut rng);
        let log_l = likelihood
            .log_likelihood(&p)
            .map_err(|e| fail(e.into(), 0, attempts as u64, events))?;
        if log_l > f64::NEG_INFINITY && !log_l.is_nan() {
            points.extend_from_slice(&p);
            log_ls.push(log_l);
        }
    }
    total_tries += attempts as u64;
    let mut live = LivePointSet::new(dim, points, log_ls);

    let log_eps = config.term_eps.ln();
    let mut samples: Vec<DiscardedSample> = Vec::new();
    let mut running = f64::NEG_INFINITY;
    let mut violations = 0;
    let (termination, last) = loop {
        iterations += 1;
        let m = iterations;
        let worst = live.worst();
        let threshold = live.log_l(worst);
        let log_x = shrinkage_log_volume(m, k);
        let log_dx = log_diff_exp(shrinkage_log_volume(m - 1, k), log_x);
        running = log_add_exp(running, threshold + log_dx);
        samples.push(DiscardedSample {
            params: live.point(worst).to_vec(),
            log_l: threshold,
            log_x,
            log_dx,
            log_weight: threshold + log_dx,
        });

        let best_other = live.max_log_l(Some(worst));
        if best_other <= threshold {
            break (Termination::Plateau, worst);
        }
        if best_other + log_x - running < log_eps {
            break (Termination::Converged, worst);
        }
        if m >= config.max_iter {
            break (Termination::MaxIter, worst);
        }

        let outcome = find_new_point(&mut live, worst, threshold, likelihood, space, &config.walk, hook, &mut rng)
            .map_err(|e| {
                if let SearchError::Budget { tries, events: ev, .. } = &e {
                    let mut all = events;
                    all += *ev;
                    return fail(e.clone().into(), iterations, total_tries + tries, all);
                }
                fail(e.into(), iterations, total_tries, events)
            })?;
        total_tries += outcome.tries;
        events += outcome.events;
        if !(outcome.log_l > threshold) || !space.contains(&outcome.point) {
            violations += 1;
        }
        live.replace(worst, &outcome.point, outcome.log_l, outcome.label);
    };

    let log_x_final = samples.last().map_or(0.0, |s| s.log_x);
    let remaining: Vec<usize> = (0..live.len()).filter(|&i| i != last).collect();
    let log_share = log_x_final - (remaining.len() as f64).ln();
    let remainder: Vec<DiscardedSample> = remaining
        .iter()
        .map(|&i| DiscardedSample {
            params: live.point(i).to_vec(),
            log_l: live.log_l(i),
            log_x: log_x_final,
            log_dx: log_share,
            log_weight: live.log_l(i) + log_share,
        })
        .collect();
    let live_rem = LiveRemainder {
        log_volume: log_x_final,
        log_mean_l: log_sum_exp(remainder.iter().map(|s| s.log_l)) - (remainder.len() as f64).ln(),
    };
    let chain: Vec<(f64, f64)> = samples.iter().map(|s| (s.log_l, s.log_x)).collect();
    let evidence = accumulate_evidence(&chain, config.quadrature, Some(live_rem))
        .expect("shrinkage volumes are strictly decreasing");
    for (s, dx) in samples.iter_mut().zip(&evidence.log_dx) {
        s.log_dx = *dx;
        s.log_weight = s.log_l + dx;
    }
    let log_evidence = evidence.log_evidence;
    let pairs = || samples.iter().chain(&remainder).map(|s| (s.log_l, s.log_weight));
    let information = information_gain(pairs(), log_evidence);
    let log_l_max = samples
        .iter()
        .chain(&remainder)
        .map(|s| s.log_l)
        .fold(f64::NEG_INFINITY, f64::max);
    let complexity = bayesian_complexity(pairs(), log_evidence, log_l_max);

    Ok(NestedRun {
        log_evidence,
        log_evidence_terms: samples.len() + remainder.len(),
        information,
        complexity,
        samples,
        remainder,
        iterations,
        cluster_invocations: events.cluster,
        total_tries,
        events,
        termination,
        constraint_violations: violations,
        seed,
        cpu_seconds: timer.elapsed_seconds(),
    })
}

/// Runs `config.n_runs` independent analyses with seeds `seed + i`,
/// concurrently. Results come back in run order.
pub fn run_repeated<L>(
    likelihood: &L,
    space: &ParameterSpace,
    config: &SamplerConfig,
    clustering: Option<&ClusterConfig>,
) -> Vec<Result<NestedRun, RunFailure>>
where
    L: LogLikelihood + ?Sized,
{
    (0..config.n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i as u64);
            match clustering {
                Some(c) => run_nested(likelihood, space, config, &mut MeanShift::new(c.clone()), seed),
                None => run_nested(likelihood, space, config, &mut NoClustering, seed),
            }
        })
        .collect()
}

/// Mean and run-to-run scatter of ln E.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedEvidence {
    pub mean: f64,
    /// Sample standard deviation; `None` with fewer than two runs.
    pub delta: Option<f64>,
    pub per_run: Vec<f64>,
}

pub fn combine_log_evidences(values: &[f64]) -> CombinedEvidence {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let delta = (values.len() >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    CombinedEvidence {
        mean,
        delta,
        per_run: values.to_vec(),
    }
}

pub fn combine_runs(runs: &[NestedRun]) -> CombinedEvidence {
    let values: Vec<f64> = runs.iter().map(|r| r.log_evidence).collect();
    combine_log_evidences(&values)
}
