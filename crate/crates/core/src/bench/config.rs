//! Run configuration files.
//!
//! One `key = value` per line, `#` comments, and one
//! `param <name> <min> <max>` line per free parameter in model order:
//!
//! ```text
//! model = gauss_peaks 3
//! data = spectrum.dat
//! data_kind = counts
//! live_points = 1000
//! param bg 0 10
//! ...
//! ```
//!
//! Every tunable has a default. [`RunConfig::to_canonical`] writes every key
//! in a fixed order, and parsing that text gives back the same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bench::data::Grid;
use crate::cluster::{ClusterConfig, GaussianForm, Kernel};
use crate::model::analytic;
use crate::model::{DataKind, LogLikelihood, ModelError, ModelSpec, ParameterSpace};
use crate::nested::{Quadrature, SamplerConfig};
use crate::walker::RescuePolicy;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

/// What is being fitted.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Spectrum(ModelSpec),
    /// `L = exp(log_value)`; needs no data.
    Constant { log_value: f64 },
    /// Normalised isotropic Gaussian centred at `center` in every parameter.
    Gaussian { center: f64, sigma: f64 },
}

impl ModelChoice {
    pub fn is_spectrum(&self) -> bool {
        matches!(self, ModelChoice::Spectrum(_))
    }

    /// Parameters the model expects, if fixed by the model itself.
    pub fn n_params(&self) -> Option<usize> {
        match self {
            ModelChoice::Spectrum(spec) => Some(spec.n_params()),
            _ => None,
        }
    }

    /// Likelihood for the analytic models; spectra need data and are built
    /// by the caller.
    pub fn analytic(&self, dim: usize) -> Option<Box<dyn LogLikelihood>> {
        match *self {
            ModelChoice::Spectrum(_) => None,
            ModelChoice::Constant { log_value } => Some(Box::new(analytic::Constant { log_value })),
            ModelChoice::Gaussian { center, sigma } => Some(Box::new(analytic::Gaussian::isotropic(dim, center, sigma))),
        }
    }

    fn render(&self) -> String {
        match self {
            ModelChoice::Spectrum(ModelSpec::GaussPeaks { n_peaks }) => format!("gauss_peaks {n_peaks}"),
            ModelChoice::Spectrum(ModelSpec::ModulatedDecay) => "modulated_decay".into(),
            ModelChoice::Constant { log_value } => format!("constant {log_value}"),
            ModelChoice::Gaussian { center, sigma } => format!("gaussian {center} {sigma}"),
        }
    }
}

/// Synthetic data drawn from the model at a known truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub truth: Vec<f64>,
    pub grid: Grid,
    pub seed: u64,
    /// Measurement uncertainty for Gaussian data.
    pub yerr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamLine {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    /// Data file, relative paths resolved against the config file's directory.
    pub data: Option<PathBuf>,
    pub data_kind: DataKind,
    pub simulation: Option<SimulationSpec>,
    pub params: Vec<ParamLine>,
    pub sampler: SamplerConfig,
    pub clustering: bool,
    pub cluster: ClusterConfig,
    pub histogram_bins: usize,
    pub output: PathBuf,
}

impl RunConfig {
    /// A configuration with every tunable at its default.
    pub fn new(model: ModelChoice, params: Vec<ParamLine>) -> Self {
        Self {
            model,
            data: None,
            data_kind: DataKind::Counts,
            simulation: None,
            params,
            sampler: SamplerConfig::default(),
            clustering: true,
            cluster: ClusterConfig::default(),
            histogram_bins: 100,
            output: PathBuf::from("output"),
        }
    }

    pub fn space(&self) -> Result<ParameterSpace, ModelError> {
        ParameterSpace::new(
            self.params.iter().map(|p| p.name.clone()).collect(),
            self.params.iter().map(|p| p.min).collect(),
            self.params.iter().map(|p| p.max).collect(),
        )
    }

    /// Non-fatal remarks about the tuning.
    pub fn warnings(&self) -> Vec<String> {
        self.sampler.walk.tuning_warning().into_iter().collect()
    }

    /// Checks cross-field consistency; every problem is reported.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.params.is_empty() {
            errors.push("no `param` lines".to_string());
        }
        if let Some(n) = self.model.n_params() {
            if n != self.params.len() {
                errors.push(format!(
                    "model {} has {n} parameters but {} `param` lines were given",
                    self.model.render(),
                    self.params.len()
                ));
            }
        }
        if self.model.is_spectrum() {
            match (&self.data, &self.simulation) {
                (None, None) => errors.push("spectral models need `data` or a simulation (`truth`, `grid`)".into()),
                (Some(_), Some(_)) => errors.push("give either `data` or a simulation, not both".into()),
                _ => {}
            }
        }
        if let Some(sim) = &self.simulation {
            if let Some(n) = self.model.n_params() {
                if sim.truth.len() != n {
                    errors.push(format!("`truth` has {} values, model needs {n}", sim.truth.len()));
                }
            }
            if sim.grid.n == 0 {
                errors.push("`grid` needs at least one point".into());
            }
            if self.data_kind == DataKind::GaussianErrors && !(sim.yerr > 0.0) {
                errors.push(format!("yerr = {} must be > 0 for gaussian data", sim.yerr));
            }
        }
        match &self.model {
            ModelChoice::Gaussian { sigma, .. } if !(*sigma > 0.0) => {
                errors.push(format!("gaussian model sigma {sigma} must be > 0"));
            }
            ModelChoice::Spectrum(ModelSpec::GaussPeaks { n_peaks: 0 }) => {
                errors.push("gauss_peaks needs at least one peak".into());
            }
            _ => {}
        }
        if let Err(e) = self.space() {
            errors.push(e.to_string());
        }
        if let Err(e) = self.sampler.validate() {
            errors.push(e.to_string());
        }
        if self.clustering {
            if let Err(e) = self.cluster.validate(self.params.len().max(1)) {
                errors.push(e.to_string());
            }
        }
        if self.histogram_bins == 0 {
            errors.push("histogram_bins must be >= 1".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Every key, in a fixed order, defaults included.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let s = &self.sampler;
        let w = &s.walk;
        let c = &self.cluster;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("model", self.model.render());
        if let Some(d) = &self.data {
            kv("data", d.display().to_string());
        }
        kv(
            "data_kind",
            match self.data_kind {
                DataKind::Counts => "counts",
                DataKind::GaussianErrors => "gaussian",
            }
            .into(),
        );
        if let Some(sim) = &self.simulation {
            kv("truth", join(&sim.truth));
            kv("grid", format!("{} {} {}", sim.grid.start, sim.grid.stop, sim.grid.n));
            kv("data_seed", sim.seed.to_string());
            kv("yerr", sim.yerr.to_string());
        }
        kv("live_points", s.live_points.to_string());
        kv("walk_steps", w.steps.to_string());
        kv("step_factor", w.step_factor.to_string());
        kv("max_tries", w.max_tries.to_string());
        kv("max_cycles", w.max_cycles.to_string());
        kv("budget_factor", w.budget_factor.to_string());
        kv(
            "rescue",
            match w.rescue {
                RescuePolicy::Reseed => "reseed",
                RescuePolicy::Accept => "accept",
            }
            .into(),
        );
        kv(
            "quadrature",
            match s.quadrature {
                Quadrature::Rectangle => "rectangle",
                Quadrature::Trapezoid => "trapezoid",
            }
            .into(),
        );
        kv("term_eps", s.term_eps.to_string());
        kv("max_iter", s.max_iter.to_string());
        kv("runs", s.n_runs.to_string());
        kv("seed", s.seed.to_string());
        kv("clustering", if self.clustering { "on" } else { "off" }.into());
        kv(
            "kernel",
            match c.kernel {
                Kernel::Flat => "flat",
                Kernel::Gaussian => "gaussian",
            }
            .into(),
        );
        kv("cluster_distance", c.radius.to_string());
        kv("bandwidth", c.bandwidth.to_string());
        kv(
            "kernel_form",
            match c.gaussian_form {
                GaussianForm::Linear => "linear",
                GaussianForm::Squared => "squared",
            }
            .into(),
        );
        kv("cluster_max_steps", c.max_steps.to_string());
        kv("shift_tol", c.shift_tol.to_string());
        kv("merge_tol", c.merge_tol.to_string());
        kv("histogram_bins", self.histogram_bins.to_string());
        kv("output", self.output.display().to_string());
        for p in &self.params {
            let _ = writeln!(out, "param {} {} {}", p.name, p.min, p.max);
        }
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn read_config(path: &Path) -> Result<RunConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Parses and validates a configuration. Line errors and missing keys are
/// collected and reported together.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigFileError> {
    let mut errors = Vec::new();
    let mut model = None;
    let mut truth = None;
    let mut grid = None;
    let mut data_seed = None;
    let mut yerr = None;
    let mut cfg = RunConfig::new(ModelChoice::Constant { log_value: 0.0 }, Vec::new());
    let mut seen = std::collections::HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut err = |msg: String| errors.push(format!("line {line_no}: {msg}"));

        if let Some(rest) = line.strip_prefix("param ").or_else(|| line.strip_prefix("param\t")) {
            let f: Vec<&str> = rest.split_whitespace().collect();
            match f.as_slice() {
                [name, lo, hi] => match (lo.parse::<f64>(), hi.parse::<f64>()) {
                    (Ok(min), Ok(max)) => cfg.params.push(ParamLine {
                        name: name.to_string(),
                        min,
                        max,
                    }),
                    _ => err(format!("bounds of `{name}` are not numbers")),
                },
                _ => err("expected `param <name> <min> <max>`".into()),
            }
            continue;
        }

        let Some((key, value)) = line.split_once('=') else {
            err(format!("expected `key = value`, found `{line}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let canonical = if key == "f" { "step_factor" } else { key };
        if !seen.insert(canonical.to_string()) {
            err(format!("duplicate key `{key}`"));
            continue;
        }
        let result: Result<(), String> = (|| {
            match key {
                "model" => model = Some(parse_model(value)?),
                "data" => cfg.data = Some(PathBuf::from(value)),
                "data_kind" => {
                    cfg.data_kind = match value {
                        "counts" => DataKind::Counts,
                        "gaussian" => DataKind::GaussianErrors,
                        _ => return Err(format!("data_kind must be counts or gaussian, found `{value}`")),
                    }
                }
                "truth" => truth = Some(floats(value)?),
                "grid" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    let [a, b, n] = f.as_slice() else {
                        return Err("grid needs `start stop n`".into());
                    };
                    grid = Some(Grid {
                        start: num(a)?,
                        stop: num(b)?,
                        n: num(n)?,
                    });
                }
                "data_seed" => data_seed = Some(num(value)?),
                "yerr" => yerr = Some(num(value)?),
                "live_points" => cfg.sampler.live_points = num(value)?,
                "walk_steps" => cfg.sampler.walk.steps = num(value)?,
                "step_factor" | "f" => cfg.sampler.walk.step_factor = num(value)?,
                "max_tries" => cfg.sampler.walk.max_tries = num(value)?,
                "max_cycles" => cfg.sampler.walk.max_cycles = num(value)?,
                "budget_factor" => cfg.sampler.walk.budget_factor = num(value)?,
                "rescue" => {
                    cfg.sampler.walk.rescue = match value {
                        "reseed" => RescuePolicy::Reseed,
                        "accept" => RescuePolicy::Accept,
                        _ => return Err(format!("rescue must be reseed or accept, found `{value}`")),
                    }
                }
                "quadrature" => cfg.sampler.quadrature = parse_quadrature(value)?,
                "term_eps" => cfg.sampler.term_eps = num(value)?,
                "max_iter" => cfg.sampler.max_iter = num(value)?,
                "runs" => cfg.sampler.n_runs = num(value)?,
                "seed" => cfg.sampler.seed = num(value)?,
                "clustering" => {
                    cfg.clustering = match value {
                        "on" => true,
                        "off" => false,
                        _ => return Err(format!("clustering must be on or off, found `{value}`")),
                    }
                }
                "kernel" => {
                    cfg.cluster.kernel = match value {
                        "flat" => Kernel::Flat,
                        "gaussian" => Kernel::Gaussian,
                        _ => return Err(format!("kernel must be flat or gaussian, found `{value}`")),
                    }
                }
                "cluster_distance" => cfg.cluster.radius = num(value)?,
                "bandwidth" => cfg.cluster.bandwidth = num(value)?,
                "kernel_form" => {
                    cfg.cluster.gaussian_form = match value {
                        "linear" => GaussianForm::Linear,
                        "squared" => GaussianForm::Squared,
                        _ => return Err(format!("kernel_form must be linear or squared, found `{value}`")),
                    }
                }
                "cluster_max_steps" => cfg.cluster.max_steps = num(value)?,
                "shift_tol" => cfg.cluster.shift_tol = num(value)?,
                "merge_tol" => cfg.cluster.merge_tol = num(value)?,
                "histogram_bins" => cfg.histogram_bins = num(value)?,
                "output" => cfg.output = PathBuf::from(value),
                _ => return Err(format!("unknown key `{key}`")),
            }
            Ok(())
        })();
        if let Err(msg) = result {
            err(msg);
        }
    }

    match model {
        Some(m) => cfg.model = m,
        None => errors.push("missing required key `model`".into()),
    }
    match (truth, grid) {
        (Some(truth), Some(grid)) => {
            cfg.simulation = Some(SimulationSpec {
                truth,
                grid,
                seed: data_seed.unwrap_or(0),
                yerr: yerr.unwrap_or(1.0),
            })
        }
        (None, None) => {
            if data_seed.is_some() || yerr.is_some() {
                errors.push("`data_seed`/`yerr` need `truth` and `grid`".into());
            }
        }
        (Some(_), None) => errors.push("missing required key `grid` (needed with `truth`)".into()),
        (None, Some(_)) => errors.push("missing required key `truth` (needed with `grid`)".into()),
    }
    if !errors.is_empty() {
        return Err(ConfigFileError::Invalid(errors));
    }
    cfg.validate().map_err(ConfigFileError::Invalid)?;
    Ok(cfg)
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse `{s}`"))
}

fn floats(s: &str) -> Result<Vec<f64>, String> {
    s.split_whitespace().map(num).collect()
}

pub fn parse_quadrature(s: &str) -> Result<Quadrature, String> {
    match s {
        "rectangle" => Ok(Quadrature::Rectangle),
        "trapezoid" => Ok(Quadrature::Trapezoid),
        _ => Err(format!("quadrature must be rectangle or trapezoid, found `{s}`")),
    }
}

fn parse_model(s: &str) -> Result<ModelChoice, String> {
    let f: Vec<&str> = s.split_whitespace().collect();
    match f.as_slice() {
        ["gauss_peaks", n] => Ok(ModelChoice::Spectrum(ModelSpec::GaussPeaks { n_peaks: num(n)? })),
        ["modulated_decay"] => Ok(ModelChoice::Spectrum(ModelSpec::ModulatedDecay)),
        ["constant", c] => Ok(ModelChoice::Constant { log_value: num(c)? }),
        ["gaussian", c, s] => Ok(ModelChoice::Gaussian {
            center: num(c)?,
            sigma: num(s)?,
        }),
        _ => Err(format!(
            "unknown model `{s}` (gauss_peaks <n>, modulated_decay, constant <ln c>, gaussian <center> <sigma>)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model = gaussian 0 1\nparam x -10 10\n";

    #[test]
    fn minimal_config_gets_defaults_and_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.sampler, SamplerConfig::default());
        assert_eq!(cfg.cluster, ClusterConfig::default());
        assert!(cfg.clustering);
        let text = cfg.to_canonical();
        let again = parse_config(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_canonical(), text);
    }

    #[test]
    fn spectrum_with_simulation_round_trips() {
        let text = "model = gauss_peaks 1\ntruth = 1 2.5 50 30\ngrid = 0 100 101\ndata_seed = 7\n\
                    step_factor = 0.15\nquadrature = rectangle\nclustering = off\n\
                    param bg 0 10\nparam width 0.5 6\nparam pos1 0 100\nparam amp1 0 60\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.sampler.walk.step_factor, 0.15);
        assert_eq!(cfg.simulation.as_ref().unwrap().seed, 7);
        let canon = cfg.to_canonical();
        assert_eq!(parse_config(&canon).unwrap().to_canonical(), canon);
    }

    #[test]
    fn negative_step_factor_rejected() {
        let err = parse_config(&format!("{MINIMAL}f = -0.1\n")).unwrap_err();
        assert!(err.to_string().contains("f > 0"), "{err}");
        let err = parse_config(&format!("{MINIMAL}f = 0.1\nstep_factor = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate key `step_factor`"), "{err}");
    }

    #[test]
    fn short_walk_warns() {
        let cfg = parse_config(&format!("{MINIMAL}walk_steps = 10\nstep_factor = 0.05\n")).unwrap();
        assert!(cfg.warnings()[0].contains("f·N < 1"));
        assert!(parse_config(MINIMAL).unwrap().warnings().is_empty());
    }

    #[test]
    fn errors_carry_line_numbers_and_are_aggregated() {
        let err = parse_config("model = gaussian 0 1\nbogus = 3\nparam x 0\nlive_points = many\n").unwrap_err();
        let ConfigFileError::Invalid(list) = err else { panic!() };
        assert_eq!(list.len(), 3, "{list:?}");
        assert!(list[0].starts_with("line 2") && list[0].contains("unknown key"));
        assert!(list[1].starts_with("line 3"));
        assert!(list[2].starts_with("line 4"));
    }

    #[test]
    fn missing_required_keys_listed_together() {
        let err = parse_config("live_points = 10\n").unwrap_err();
        let ConfigFileError::Invalid(list) = err else { panic!() };
        assert!(list.iter().any(|e| e.contains("`model`")));

        let err = parse_config("model = gauss_peaks 1\n").unwrap_err();
        let ConfigFileError::Invalid(list) = err else { panic!() };
        assert!(list.iter().any(|e| e.contains("param")));
        assert!(list.iter().any(|e| e.contains("data")));
        assert!(list.iter().any(|e| e.contains("4 parameters")));
    }
}
