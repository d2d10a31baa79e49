//! Multi-seed analyses and their output files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bench::config::{ModelChoice, RunConfig};
use crate::bench::data::{self, DataError};
use crate::model::{Dataset, LogLikelihood, ModelError, ParameterSpace, SpectrumLikelihood};
use crate::nested::{combine_runs, run_repeated, CombinedEvidence, NestedRun, RunFailure, Termination};
use crate::posterior::{ParamSummary, PosteriorError, WeightedPosterior};
use crate::timing::ThreadCpuTimer;

#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),
}

/// A likelihood and prior box ready to sample.
pub struct Problem {
    pub likelihood: Box<dyn LogLikelihood>,
    pub space: ParameterSpace,
    pub data: Option<Dataset>,
}

/// Loads or simulates the data a configuration refers to. Relative data
/// paths are taken from `base_dir`.
pub fn load_dataset(cfg: &RunConfig, base_dir: &Path) -> Result<Option<Dataset>, SetupError> {
    let ModelChoice::Spectrum(spec) = cfg.model else {
        return Ok(None);
    };
    if let Some(path) = &cfg.data {
        return Ok(Some(data::read_data(&base_dir.join(path), cfg.data_kind)?));
    }
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| SetupError::Config(vec!["spectral model without data or simulation".into()]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    Ok(Some(data::simulate(&spec, &sim.truth, &sim.grid, cfg.data_kind, sim.yerr, &mut rng)?))
}

pub fn prepare(cfg: &RunConfig, base_dir: &Path) -> Result<Problem, SetupError> {
    cfg.validate().map_err(SetupError::Config)?;
    let space = cfg.space()?;
    let data = load_dataset(cfg, base_dir)?;
    let likelihood: Box<dyn LogLikelihood> = match (&cfg.model, &data) {
        (ModelChoice::Spectrum(spec), Some(d)) => Box::new(SpectrumLikelihood::new(*spec, d.clone())),
        (model, _) => model.analytic(space.dim()).expect("analytic model"),
    };
    Ok(Problem { likelihood, space, data })
}

/// All runs of one configuration.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub names: Vec<String>,
    pub live_points: usize,
    pub outcomes: Vec<Result<NestedRun, RunFailure>>,
    pub wall_seconds: f64,
    /// CPU time of the calling thread plus every run's own thread time.
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Some but not all runs aborted.
    Partial,
    Failed,
}

pub fn analyze(cfg: &RunConfig, problem: &Problem) -> Analysis {
    let wall = Instant::now();
    let cpu = ThreadCpuTimer::start();
    let clustering = cfg.clustering.then_some(&cfg.cluster);
    let outcomes = run_repeated(problem.likelihood.as_ref(), &problem.space, &cfg.sampler, clustering);
    let run_cpu: f64 = outcomes.iter().filter_map(|o| o.as_ref().ok()).map(|r| r.cpu_seconds).sum();
    Analysis {
        names: problem.space.names().to_vec(),
        live_points: cfg.sampler.live_points,
        outcomes,
        wall_seconds: wall.elapsed().as_secs_f64(),
        cpu_seconds: cpu.elapsed_seconds() + run_cpu,
    }
}

impl Analysis {
    pub fn completed(&self) -> impl Iterator<Item = &NestedRun> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn status(&self) -> Status {
        let ok = self.completed().count();
        if ok == self.outcomes.len() {
            Status::Complete
        } else if ok == 0 {
            Status::Failed
        } else {
            Status::Partial
        }
    }

    pub fn evidence(&self) -> Option<CombinedEvidence> {
        let runs: Vec<NestedRun> = self.completed().cloned().collect();
        (!runs.is_empty()).then(|| combine_runs(&runs))
    }

    pub fn posterior(&self) -> Result<WeightedPosterior, PosteriorError> {
        WeightedPosterior::pooled(self.completed())
    }

    fn mean_of(&self, f: impl Fn(&NestedRun) -> f64) -> Option<f64> {
        let v: Vec<f64> = self.completed().map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// `key: value` report. Every key is always present; missing values are
    /// written as `null`.
    pub fn results_text(&self, summaries: &[Option<ParamSummary>]) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        let opt = |v: Option<f64>| v.map_or_else(|| "null".to_string(), |x| x.to_string());
        let evidence = self.evidence();
        let k = self.live_points;
        kv(
            "status",
            match self.status() {
                Status::Complete => "complete",
                Status::Partial => "partial",
                Status::Failed => "failed",
            }
            .into(),
        );
        kv("runs_requested", self.outcomes.len().to_string());
        kv("runs_completed", self.completed().count().to_string());
        kv("live_points", k.to_string());
        kv("log_evidence_mean", opt(evidence.as_ref().map(|e| e.mean)));
        kv("log_evidence_delta", opt(evidence.as_ref().and_then(|e| e.delta)));
        kv(
            "log_evidence_expected_error",
            opt(self.mean_of(|r| r.expected_log_evidence_error(k))),
        );
        kv("information_mean", opt(self.mean_of(|r| r.information)));
        kv("complexity_mean", opt(self.mean_of(|r| r.complexity)));
        let totals = |f: &dyn Fn(&Result<NestedRun, RunFailure>) -> u64| self.outcomes.iter().map(f).sum::<u64>();
        kv(
            "iterations_total",
            totals(&|o| match o {
                Ok(r) => r.iterations as u64,
                Err(f) => f.iterations as u64,
            })
            .to_string(),
        );
        kv(
            "tries_total",
            totals(&|o| match o {
                Ok(r) => r.total_tries,
                Err(f) => f.total_tries,
            })
            .to_string(),
        );
        kv(
            "cluster_invocations_total",
            totals(&|o| match o {
                Ok(r) => r.cluster_invocations,
                Err(f) => f.cluster_invocations,
            })
            .to_string(),
        );
        kv("constraint_violations", totals(&|o| o.as_ref().map_or(0, |r| r.constraint_violations)).to_string());
        kv("wall_seconds", self.wall_seconds.to_string());
        kv("cpu_seconds", self.cpu_seconds.to_string());

        for (i, o) in self.outcomes.iter().enumerate() {
            let p = format!("run_{i}_");
            let run = o.as_ref().ok();
            match o {
                Ok(r) => {
                    kv(&format!("{p}seed"), r.seed.to_string());
                    kv(&format!("{p}status"), "ok".into());
                }
                Err(f) => {
                    kv(&format!("{p}seed"), f.seed.to_string());
                    kv(&format!("{p}status"), format!("failed: {}", f.error));
                }
            }
            kv(&format!("{p}log_evidence"), opt(run.map(|r| r.log_evidence)));
            kv(&format!("{p}information"), opt(run.map(|r| r.information)));
            kv(&format!("{p}complexity"), opt(run.map(|r| r.complexity)));
            kv(
                &format!("{p}termination"),
                run.map_or("null", |r| match r.termination {
                    Termination::Converged => "converged",
                    Termination::Plateau => "plateau",
                    Termination::MaxIter => "max_iter",
                })
                .into(),
            );
            let (it, tries, cl) = match o {
                Ok(r) => (r.iterations, r.total_tries, r.cluster_invocations),
                Err(f) => (f.iterations, f.total_tries, f.cluster_invocations),
            };
            kv(&format!("{p}iterations"), it.to_string());
            kv(&format!("{p}tries"), tries.to_string());
            kv(&format!("{p}cluster_invocations"), cl.to_string());
            kv(&format!("{p}cpu_seconds"), opt(run.map(|r| r.cpu_seconds)));
        }

        for (name, s) in self.names.iter().zip(summaries) {
            let p = format!("param_{name}_");
            let field = |f: fn(&ParamSummary) -> f64| opt(s.as_ref().map(f));
            kv(&format!("{p}mean"), field(|s| s.mean));
            kv(&format!("{p}median"), field(|s| s.median));
            kv(&format!("{p}std"), field(|s| s.std));
            kv(&format!("{p}ci68_low"), field(|s| s.ci68.0));
            kv(&format!("{p}ci68_high"), field(|s| s.ci68.1));
            kv(&format!("{p}ci95_low"), field(|s| s.ci95.0));
            kv(&format!("{p}ci95_high"), field(|s| s.ci95.1));
            kv(&format!("{p}ci99_low"), field(|s| s.ci99.0));
            kv(&format!("{p}ci99_high"), field(|s| s.ci99.1));
            kv(&format!("{p}max_likelihood"), field(|s| s.ml_value));
        }
        out
    }

    /// Writes `results.txt`, `posterior_samples.dat`, `summary.csv`,
    /// `hist_<name>.csv`, `hist2d_<a>_<b>.csv` and `trace.csv` into `dir`.
    /// Histograms span the prior box.
    pub fn write_outputs(&self, dir: &Path, space: &ParameterSpace, bins: usize) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let posterior = self.posterior().ok();
        let summaries: Vec<Option<ParamSummary>> = (0..self.names.len())
            .map(|j| posterior.as_ref().and_then(|p| p.summarize(j).ok()))
            .collect();
        fs::write(dir.join("results.txt"), self.results_text(&summaries))?;

        let mut w = BufWriter::new(fs::File::create(dir.join("posterior_samples.dat"))?);
        writeln!(w, "# weight logL {}", self.names.join(" "))?;
        if let Some(p) = &posterior {
            for i in 0..p.len() {
                write!(w, "{:e} {:e}", p.weights()[i], p.log_ls()[i])?;
                for v in p.sample(i) {
                    write!(w, " {v:e}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()?;

        let mut csv = String::from("name,mean,median,std,ci68_low,ci68_high,ci95_low,ci95_high,ci99_low,ci99_high,max_likelihood\n");
        for (name, s) in self.names.iter().zip(&summaries) {
            let row = match s {
                Some(s) => [
                    s.mean, s.median, s.std, s.ci68.0, s.ci68.1, s.ci95.0, s.ci95.1, s.ci99.0, s.ci99.1, s.ml_value,
                ]
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>(),
                None => vec!["null".to_string(); 10],
            };
            let _ = writeln!(csv, "{name},{}", row.join(","));
        }
        fs::write(dir.join("summary.csv"), csv)?;

        if let Some(p) = &posterior {
            let range = |j: usize| (space.lower()[j], space.upper()[j]);
            for (j, name) in self.names.iter().enumerate() {
                let h = p.marginal_hist(j, bins, range(j)).map_err(io::Error::other)?;
                let mut s = format!("# out_of_range: {:e}\nbin_low,bin_high,mass\n", h.out_of_range);
                for b in 0..h.mass.len() {
                    let (lo, hi) = h.bin_edges(b);
                    let _ = writeln!(s, "{lo:e},{hi:e},{:e}", h.mass[b]);
                }
                fs::write(dir.join(format!("hist_{name}.csv")), s)?;
            }
            let bins2 = bins.min(50);
            for a in 0..self.names.len() {
                for b in a + 1..self.names.len() {
                    let h = p
                        .joint_hist(a, b, (bins2, bins2), (range(a), range(b)))
                        .map_err(io::Error::other)?;
                    let mut s = format!("# out_of_range: {:e}\nbin1,bin2,mass\n", h.out_of_range);
                    for i in 0..bins2 {
                        for k in 0..bins2 {
                            let _ = writeln!(s, "{i},{k},{:e}", h.at(i, k));
                        }
                    }
                    fs::write(dir.join(format!("hist2d_{}_{}.csv", self.names[a], self.names[b])), s)?;
                }
            }
        }

        let mut w = BufWriter::new(fs::File::create(dir.join("trace.csv"))?);
        writeln!(w, "run,m,log_x,log_weight,log_l,{}", self.names.join(","))?;
        for (i, o) in self.outcomes.iter().enumerate() {
            let Ok(r) = o else { continue };
            for (m, s) in r.all_samples().enumerate() {
                write!(w, "{i},{},{:e},{:e},{:e}", m + 1, s.log_x, s.log_weight, s.log_l)?;
                for v in &s.params {
                    write!(w, ",{v:e}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()
    }
}
