//! How the ln E scatter and the CPU cost scale with the number of live points.

use std::fmt::Write as _;

use crate::bench::config::RunConfig;
use crate::bench::run::{analyze, Problem};

/// `y = a · x^c`, fitted by least squares on `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    /// Standard error of the exponent; `None` with two points.
    pub exponent_err: Option<f64>,
    pub points: usize,
}

/// `None` with fewer than two usable points (positive, finite `x` and `y`,
/// at least two distinct `x`).
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerLaw> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c = sxy / sxx;
    let a = my - c * mx;
    let exponent_err = (logs.len() > 2).then(|| {
        let rss: f64 = logs.iter().map(|p| (p.1 - a - c * p.0).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    });
    Some(PowerLaw {
        exponent: c,
        prefactor: a.exp(),
        exponent_err,
        points: logs.len(),
    })
}

/// K values to leave out of each fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitExclusions {
    /// ln E scatter fit uses only `K >= delta_min_k`.
    pub delta_min_k: usize,
    /// CPU fit uses only `K <= cpu_max_k`.
    pub cpu_max_k: usize,
}

impl Default for FitExclusions {
    fn default() -> Self {
        Self {
            delta_min_k: 500,
            cpu_max_k: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KRow {
    pub live_points: usize,
    pub runs_completed: usize,
    pub log_evidence_mean: Option<f64>,
    pub delta: Option<f64>,
    /// Mean over runs of `√(H/K)`.
    pub expected_error: Option<f64>,
    /// Mean CPU seconds per completed run.
    pub cpu_seconds: Option<f64>,
    /// Summed over completed runs; nonzero means a broken hard constraint.
    pub constraint_violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScan {
    pub rows: Vec<KRow>,
    pub exclusions: FitExclusions,
    pub delta_fit: Option<PowerLaw>,
    pub cpu_fit: Option<PowerLaw>,
}

impl KScan {
    pub fn from_rows(rows: Vec<KRow>, exclusions: FitExclusions) -> Self {
        let delta_pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.live_points >= exclusions.delta_min_k)
            .filter_map(|r| r.delta.map(|d| (r.live_points as f64, d)))
            .collect();
        let cpu_pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.live_points <= exclusions.cpu_max_k)
            .filter_map(|r| r.cpu_seconds.map(|c| (r.live_points as f64, c)))
            .collect();
        Self {
            delta_fit: fit_power_law(&delta_pts),
            cpu_fit: fit_power_law(&cpu_pts),
            rows,
            exclusions,
        }
    }

    pub fn table_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "null".to_string(), |x| x.to_string());
        let mut s = String::from("live_points,runs_completed,log_evidence_mean,delta,expected_error,cpu_seconds\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.live_points,
                r.runs_completed,
                opt(r.log_evidence_mean),
                opt(r.delta),
                opt(r.expected_error),
                opt(r.cpu_seconds)
            );
        }
        s
    }

    pub fn fit_text(&self) -> String {
        let mut s = String::new();
        let mut fit = |name: &str, f: &Option<PowerLaw>| match f {
            Some(f) => {
                let _ = writeln!(s, "{name}_exponent: {}", f.exponent);
                let _ = writeln!(
                    s,
                    "{name}_exponent_err: {}",
                    f.exponent_err.map_or("null".into(), |e| e.to_string())
                );
                let _ = writeln!(s, "{name}_prefactor: {}", f.prefactor);
                let _ = writeln!(s, "{name}_points: {}", f.points);
            }
            None => {
                for k in ["exponent", "exponent_err", "prefactor"] {
                    let _ = writeln!(s, "{name}_{k}: null");
                }
                let _ = writeln!(s, "{name}_points: 0");
            }
        };
        fit("delta", &self.delta_fit);
        fit("cpu", &self.cpu_fit);
        let _ = writeln!(s, "delta_min_k: {}", self.exclusions.delta_min_k);
        let _ = writeln!(s, "cpu_max_k: {}", self.exclusions.cpu_max_k);
        s
    }
}

/// Runs the configuration once per K value (each with `cfg.sampler.n_runs`
/// seeds) and fits both power laws.
pub fn kscan(cfg: &RunConfig, problem: &Problem, ks: &[usize], exclusions: FitExclusions) -> KScan {
    let rows = ks
        .iter()
        .map(|&k| {
            let mut c = cfg.clone();
            c.sampler.live_points = k;
            let a = analyze(&c, problem);
            let ev = a.evidence();
            let runs: Vec<_> = a.completed().collect();
            let mean = |f: &dyn Fn(&crate::nested::NestedRun) -> f64| {
                (!runs.is_empty()).then(|| runs.iter().map(|r| f(r)).sum::<f64>() / runs.len() as f64)
            };
            KRow {
                live_points: k,
                runs_completed: runs.len(),
                log_evidence_mean: ev.as_ref().map(|e| e.mean),
                delta: ev.as_ref().and_then(|e| e.delta),
                expected_error: mean(&|r| r.expected_log_evidence_error(k)),
                cpu_seconds: mean(&|r| r.cpu_seconds),
                constraint_violations: runs.iter().map(|r| r.constraint_violations).sum(),
            }
        })
        .collect();
    KScan::from_rows(rows, exclusions)
}
