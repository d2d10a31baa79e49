//! Parameter spaces, uniform box priors, spectral model families and their
//! Poisson / Gaussian log-likelihoods.

use rand::Rng;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter space must have at least one dimension")]
    EmptySpace,
    #[error("parameter space vectors disagree in length (names {names}, lower {lower}, upper {upper})")]
    ShapeMismatch {
        names: usize,
        lower: usize,
        upper: usize,
    },
    #[error("parameter `{name}`: lower bound {lower} must be strictly below upper bound {upper}")]
    EmptyInterval { name: String, lower: f64, upper: f64 },
    #[error("dataset columns disagree in length or are empty")]
    DatasetShape,
    #[error("dataset row {row}: {reason}")]
    DatasetValue { row: usize, reason: String },
    #[error("{model} expects {expected} parameters, got {got}")]
    Layout {
        model: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parameter {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
}

/// Anything the nested sampler can integrate: a log-likelihood over a
/// parameter vector. `f64::NEG_INFINITY` is a valid value (zero likelihood);
/// errors are reserved for malformed input.
pub trait LogLikelihood: Sync {
    fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError>;
}

impl<F> LogLikelihood for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError> {
        Ok(self(params))
    }
}

/// A J-dimensional box with a uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterSpace {
    pub fn new(names: Vec<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if names.len() != lower.len() || lower.len() != upper.len() {
            return Err(ModelError::ShapeMismatch {
                names: names.len(),
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if names.is_empty() {
            return Err(ModelError::EmptySpace);
        }
        for ((name, &lo), &hi) in names.iter().zip(&lower).zip(&upper) {
            // NaN bounds fail this test too.
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ModelError::EmptyInterval {
                    name: name.clone(),
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { names, lower, upper })
    }

    /// Convenience constructor with generated names `p0, p1, ...`.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self, ModelError> {
        let names = (0..bounds.len()).map(|j| format!("p{j}")).collect();
        let (lower, upper) = bounds.iter().copied().unzip();
        Self::new(names, lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Natural log of the prior box volume.
    pub fn log_volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo).ln())
            .sum()
    }

    /// True when every coordinate lies in the closed box.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Draws one point uniformly from the box.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// `(channel, counts)`: Poisson statistics.
    Counts,
    /// `(x, y, yerr)`: independent Gaussian errors.
    GaussianErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    kind: DataKind,
    x: Vec<f64>,
    y: Vec<f64>,
    yerr: Option<Vec<f64>>,
}

impl Dataset {
    pub fn counts(x: Vec<f64>, y: Vec<f64>) -> Result<Self, ModelError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(ModelError::DatasetShape);
        }
        for (row, &c) in y.iter().enumerate() {
            if !(c >= 0.0) || c.fract() != 0.0 || !c.is_finite() {
                return Err(ModelError::DatasetValue {
                    row,
                    reason: format!("count {c} is not a non-negative integer"),
                });
            }
        }
        check_finite(&x)?;
        Ok(Self {
            kind: DataKind::Counts,
            x,
            y,
            yerr: None,
        })
    }

    pub fn gaussian(x: Vec<f64>, y: Vec<f64>, yerr: Vec<f64>) -> Result<Self, ModelError> {
        if x.is_empty() || x.len() != y.len() || y.len() != yerr.len() {
            return Err(ModelError::DatasetShape);
        }
        for (row, &e) in yerr.iter().enumerate() {
            if !(e > 0.0) || !e.is_finite() {
                return Err(ModelError::DatasetValue {
                    row,
                    reason: format!("uncertainty {e} must be positive"),
                });
            }
        }
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(Self {
            kind: DataKind::GaussianErrors,
            x,
            y,
            yerr: Some(yerr),
        })
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn yerr(&self) -> Option<&[f64]> {
        self.yerr.as_deref()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn check_finite(values: &[f64]) -> Result<(), ModelError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(ModelError::DatasetValue {
            row,
            reason: "value is not finite".into(),
        }),
        None => Ok(()),
    }
}

/// Supported spectral model families.
///
/// Parameter layouts are fixed:
///
/// * `GaussPeaks { n_peaks }`: `[bg, width, pos_1..pos_n, amp_1..amp_n]`
/// * `ModulatedDecay`: `[norm, lifetime, rel_amplitude, pulsation, phase]`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    /// `n_peaks` Gaussian lines sharing one width on a flat background.
    GaussPeaks { n_peaks: usize },
    /// Exponential decay with a sinusoidal modulation.
    ModulatedDecay,
}

impl ModelSpec {
    pub fn n_params(&self) -> usize {
        match *self {
            ModelSpec::GaussPeaks { n_peaks } => 2 + 2 * n_peaks,
            ModelSpec::ModulatedDecay => 5,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            ModelSpec::GaussPeaks { .. } => "gauss_peaks",
            ModelSpec::ModulatedDecay => "modulated_decay",
        }
    }

    /// Default parameter names following the layout.
    pub fn param_names(&self) -> Vec<String> {
        match *self {
            ModelSpec::GaussPeaks { n_peaks } => {
                let mut names = vec!["bg".to_string(), "width".to_string()];
                names.extend((1..=n_peaks).map(|k| format!("pos{k}")));
                names.extend((1..=n_peaks).map(|k| format!("amp{k}")));
                names
            }
            ModelSpec::ModulatedDecay => ["norm", "lifetime", "rel_amplitude", "pulsation", "phase"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn check_params(&self, params: &[f64]) -> Result<(), ModelError> {
        if params.len() != self.n_params() {
            return Err(ModelError::Layout {
                model: self.label(),
                expected: self.n_params(),
                got: params.len(),
            });
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(ModelError::NonFinite {
                index,
                value: params[index],
            });
        }
        match self {
            ModelSpec::GaussPeaks { .. } if params[1] <= 0.0 => Err(ModelError::NonPositive("width")),
            ModelSpec::ModulatedDecay if params[1] <= 0.0 => Err(ModelError::NonPositive("lifetime")),
            _ => Ok(()),
        }
    }

    /// Model prediction at a single abscissa. `params` must already be checked.
    #[inline]
    pub fn predict_at(&self, params: &[f64], x: f64) -> f64 {
        match *self {
            ModelSpec::GaussPeaks { n_peaks } => {
                let bg = params[0];
                let inv_two_var = 1.0 / (2.0 * params[1] * params[1]);
                let pos = &params[2..2 + n_peaks];
                let amp = &params[2 + n_peaks..2 + 2 * n_peaks];
                bg + pos
                    .iter()
                    .zip(amp)
                    .map(|(p, a)| {
                        let d = x - p;
                        a * (-d * d * inv_two_var).exp()
                    })
                    .sum::<f64>()
            }
            ModelSpec::ModulatedDecay => {
                let [norm, lifetime, rel, omega, phase] = [params[0], params[1], params[2], params[3], params[4]];
                norm * (-x / lifetime).exp() * (1.0 + rel * (omega * x + phase).cos())
            }
        }
    }

    pub fn eval(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_params(params)?;
        Ok(x.iter().map(|&xi| self.predict_at(params, xi)).collect())
    }
}

/// Poisson log-mass of `count` given intensity `lambda`, without the
/// `ln Γ(count + 1)` term.
#[inline]
fn poisson_kernel(count: f64, lambda: f64) -> f64 {
    if lambda > 0.0 {
        count * lambda.ln() - lambda
    } else if lambda == 0.0 && count == 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-likelihood of `data` under `spec` evaluated at `params`.
///
/// Counts use Poisson statistics, measurements with uncertainties use a
/// Gaussian. All normalisation constants are kept so evidences are absolute.
pub fn log_likelihood(spec: &ModelSpec, params: &[f64], data: &Dataset) -> Result<f64, ModelError> {
    spec.check_params(params)?;
    let mut total = 0.0;
    match data.kind {
        DataKind::Counts => {
            for (&x, &y) in data.x.iter().zip(&data.y) {
                let lambda = spec.predict_at(params, x);
                total += poisson_kernel(y, lambda) - ln_gamma(y + 1.0);
            }
        }
        DataKind::GaussianErrors => {
            let yerr = data.yerr.as_deref().unwrap_or_default();
            for ((&x, &y), &e) in data.x.iter().zip(&data.y).zip(yerr) {
                let r = (y - spec.predict_at(params, x)) / e;
                total += -0.5 * r * r - e.ln() - LN_SQRT_2PI;
            }
        }
    }
    Ok(total)
}

/// A model bound to its data, with the parameter-independent constants
/// precomputed. Numerically identical in intent to [`log_likelihood`].
#[derive(Debug, Clone)]
pub struct SpectrumLikelihood {
    spec: ModelSpec,
    data: Dataset,
    constant: f64,
    inv_err: Vec<f64>,
}

impl SpectrumLikelihood {
    pub fn new(spec: ModelSpec, data: Dataset) -> Self {
        let (constant, inv_err) = match data.kind {
            DataKind::Counts => (-data.y.iter().map(|&y| ln_gamma(y + 1.0)).sum::<f64>(), Vec::new()),
            DataKind::GaussianErrors => {
                let yerr = data.yerr.as_deref().unwrap_or_default();
                (
                    -yerr.iter().map(|e| e.ln() + LN_SQRT_2PI).sum::<f64>(),
                    yerr.iter().map(|e| 1.0 / e).collect(),
                )
            }
        };
        Self {
            spec,
            data,
            constant,
            inv_err,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }
}

impl LogLikelihood for SpectrumLikelihood {
    fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError> {
        self.spec.check_params(params)?;
        let mut total = self.constant;
        match self.data.kind {
            DataKind::Counts => {
                for (&x, &y) in self.data.x.iter().zip(&self.data.y) {
                    total += poisson_kernel(y, self.spec.predict_at(params, x));
                    if total == f64::NEG_INFINITY {
                        break;
                    }
                }
            }
            DataKind::GaussianErrors => {
                for ((&x, &y), &w) in self.data.x.iter().zip(&self.data.y).zip(&self.inv_err) {
                    let r = (y - self.spec.predict_at(params, x)) * w;
                    total -= 0.5 * r * r;
                }
            }
        }
        Ok(total)
    }
}

/// Closed-form likelihoods used for validation and calibration runs.
pub mod analytic {
    use super::*;

    /// `L(a) = c` everywhere.
    #[derive(Debug, Clone, Copy)]
    pub struct Constant {
        pub log_value: f64,
    }

    impl LogLikelihood for Constant {
        fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError> {
            finite(params)?;
            Ok(self.log_value)
        }
    }

    /// Normalised product of independent Gaussians.
    #[derive(Debug, Clone)]
    pub struct Gaussian {
        pub mean: Vec<f64>,
        pub sigma: Vec<f64>,
    }

    impl Gaussian {
        pub fn isotropic(dim: usize, center: f64, sigma: f64) -> Self {
            Self {
                mean: vec![center; dim],
                sigma: vec![sigma; dim],
            }
        }
    }

    impl LogLikelihood for Gaussian {
        fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError> {
            finite(params)?;
            Ok(params
                .iter()
                .zip(self.mean.iter().zip(&self.sigma))
                .map(|(x, (m, s))| {
                    let z = (x - m) / s;
                    -0.5 * z * z - s.ln() - LN_SQRT_2PI
                })
                .sum())
        }
    }

    /// Equal-weight mixture of normalised isotropic Gaussians.
    #[derive(Debug, Clone)]
    pub struct GaussianMixture {
        pub centers: Vec<Vec<f64>>,
        pub sigma: f64,
    }

    impl LogLikelihood for GaussianMixture {
        fn log_likelihood(&self, params: &[f64]) -> Result<f64, ModelError> {
            finite(params)?;
            let dim = params.len() as f64;
            let norm = -dim * (self.sigma.ln() + LN_SQRT_2PI) - (self.centers.len() as f64).ln();
            let terms = self.centers.iter().map(|c| {
                let r2: f64 = params.iter().zip(c).map(|(x, m)| (x - m) * (x - m)).sum();
                -0.5 * r2 / (self.sigma * self.sigma)
            });
            Ok(norm + crate::nested::log_sum_exp(terms))
        }
    }

    fn finite(params: &[f64]) -> Result<(), ModelError> {
        match params.iter().position(|p| !p.is_finite()) {
            Some(index) => Err(ModelError::NonFinite {
                index,
                value: params[index],
            }),
            None => Ok(()),
        }
    }

    /// Exact ln of the standard normal CDF difference `Φ(b) − Φ(a)` for `a < b`.
    pub fn log_normal_mass(a: f64, b: f64) -> f64 {
        use statrs::function::erf::erfc;
        let sqrt2 = std::f64::consts::SQRT_2;
        // Φ(b) − Φ(a) = (erfc(a/√2) − erfc(b/√2)) / 2
        (0.5 * (erfc(a / sqrt2) - erfc(b / sqrt2))).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn peaks(n: usize) -> ModelSpec {
        ModelSpec::GaussPeaks { n_peaks: n }
    }

    #[test]
    fn degenerate_interval_rejected() {
        let err = ParameterSpace::from_bounds(&[(1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, ModelError::EmptyInterval { .. }));
        assert!(ParameterSpace::from_bounds(&[(2.0, 1.0)]).is_err());
        assert!(matches!(ParameterSpace::from_bounds(&[]), Err(ModelError::EmptySpace)));
    }

    #[test]
    fn prior_draws_stay_in_box_and_are_seeded() {
        let space = ParameterSpace::from_bounds(&[(0.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = space.sample_prior(&mut rng);
            assert!((0.0..=1.0).contains(&p[0]));
        }
        let a = space.sample_prior(&mut ChaCha8Rng::seed_from_u64(11));
        let b = space.sample_prior(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn single_peak_center_value() {
        let v = peaks(1).eval(&[0.0, 1.0, 5.0, 2.0], &[5.0]).unwrap();
        assert_eq!(v, vec![2.0]);
    }

    #[test]
    fn background_only() {
        let v = peaks(2).eval(&[3.0, 1.5, 1.0, 7.0, 0.0, 0.0], &[-4.0, 0.0, 9.0]).unwrap();
        assert!(v.iter().all(|&y| y == 3.0));
    }

    #[test]
    fn pure_exponential_decay() {
        let v = ModelSpec::ModulatedDecay
            .eval(&[1.0, 2.0, 0.0, 3.0, 0.4], &[2.0])
            .unwrap();
        assert_abs_diff_eq!(v[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[0], 0.367879, epsilon = 1e-6);
    }

    #[test]
    fn layout_errors() {
        assert!(matches!(
            peaks(2).eval(&[1.0, 1.0, 1.0], &[0.0]),
            Err(ModelError::Layout { expected: 6, got: 3, .. })
        ));
        assert!(matches!(
            peaks(1).eval(&[0.0, 0.0, 1.0, 1.0], &[0.0]),
            Err(ModelError::NonPositive("width"))
        ));
        assert!(matches!(
            ModelSpec::ModulatedDecay.eval(&[1.0, -1.0, 0.0, 0.0, 0.0], &[0.0]),
            Err(ModelError::NonPositive("lifetime"))
        ));
    }

    #[test]
    fn poisson_examples() {
        // y=0, λ=1 → −1
        let data = Dataset::counts(vec![0.0], vec![0.0]).unwrap();
        let ll = log_likelihood(&peaks(1), &[1.0, 1.0, 50.0, 0.0], &data).unwrap();
        assert_abs_diff_eq!(ll, -1.0, epsilon = 1e-14);

        // y=2, λ=2 → 2 ln 2 − 2 − ln 2! ; oracle: direct Poisson mass
        let oracle = (2.0f64.powi(2) * (-2.0f64).exp() / 2.0).ln();
        let data = Dataset::counts(vec![0.0], vec![2.0]).unwrap();
        let ll = log_likelihood(&peaks(1), &[2.0, 1.0, 50.0, 0.0], &data).unwrap();
        assert_abs_diff_eq!(ll, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(ll, -1.306853, epsilon = 1e-6);
    }

    #[test]
    fn poisson_sentinels() {
        let spec = peaks(1);
        // λ = 0 with y > 0
        let data = Dataset::counts(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(
            log_likelihood(&spec, &[0.0, 1.0, 50.0, 0.0], &data).unwrap(),
            f64::NEG_INFINITY
        );
        // λ = 0 with y = 0 contributes nothing
        let data = Dataset::counts(vec![0.0], vec![0.0]).unwrap();
        assert_abs_diff_eq!(log_likelihood(&spec, &[0.0, 1.0, 50.0, 0.0], &data).unwrap(), 0.0, epsilon = 1e-15);
        // non-finite parameters are an input error, not a sentinel
        assert!(matches!(
            log_likelihood(&spec, &[f64::NAN, 1.0, 50.0, 0.0], &data),
            Err(ModelError::NonFinite { index: 0, .. })
        ));
    }

    #[test]
    fn gaussian_zero_residual() {
        let data = Dataset::gaussian(vec![1.0], vec![4.0], vec![1.0]).unwrap();
        let ll = log_likelihood(&peaks(1), &[4.0, 1.0, 50.0, 0.0], &data).unwrap();
        assert_abs_diff_eq!(ll, -(std::f64::consts::TAU.sqrt().ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(ll, -0.918939, epsilon = 1e-6);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::counts(vec![0.0], vec![-1.0]).is_err());
        assert!(Dataset::counts(vec![0.0], vec![1.5]).is_err());
        assert!(Dataset::counts(vec![], vec![]).is_err());
        assert!(Dataset::gaussian(vec![0.0], vec![1.0], vec![0.0]).is_err());
        assert!(Dataset::gaussian(vec![0.0, 1.0], vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn cached_likelihood_matches_direct() {
        let spec = peaks(2);
        let params = [1.5, 2.0, 10.0, 20.0, 8.0, 3.0];
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = (0..30).map(|i| f64::from(i % 7)).collect();
        let counts = Dataset::counts(x.clone(), y.clone()).unwrap();
        let direct = log_likelihood(&spec, &params, &counts).unwrap();
        let cached = SpectrumLikelihood::new(spec, counts).log_likelihood(&params).unwrap();
        assert_abs_diff_eq!(direct, cached, epsilon = 1e-9);

        let yerr = vec![0.7; 30];
        let gauss = Dataset::gaussian(x, y, yerr).unwrap();
        let direct = log_likelihood(&spec, &params, &gauss).unwrap();
        let cached = SpectrumLikelihood::new(spec, gauss).log_likelihood(&params).unwrap();
        assert_abs_diff_eq!(direct, cached, epsilon = 1e-9);
    }

    #[test]
    fn poisson_maximum_at_observed_count() {
        for y in [0.0, 1.0, 3.0, 17.0] {
            let at_y = if y == 0.0 { 0.0 } else { poisson_kernel(y, y) };
            for i in 1..2000 {
                let lambda = f64::from(i) * 0.02;
                assert!(poisson_kernel(y, lambda) <= at_y + 1e-12, "y={y} λ={lambda}");
            }
        }
    }

    #[test]
    fn phase_periodicity() {
        let spec = ModelSpec::ModulatedDecay;
        let x: Vec<f64> = (0..20).map(|i| f64::from(i) * 0.37).collect();
        let a = spec.eval(&[3.0, 4.0, 0.3, 1.7, 0.9], &x).unwrap();
        let b = spec.eval(&[3.0, 4.0, 0.3, 1.7, 0.9 + std::f64::consts::TAU], &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }
}
