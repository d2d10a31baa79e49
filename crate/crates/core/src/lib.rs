//! Nested sampling for Bayesian evidence and posterior estimation on
//! multimodal likelihoods.
//!
//! New live points are found with a bounded random walk; when the walk keeps
//! failing, the live points are partitioned with mean-shift clustering and
//! each walk is scaled by the spread of its own cluster instead of the whole
//! ensemble.
//!
//! * [`model`]: parameter boxes, datasets, spectral models and likelihoods
//! * [`nested`]: the sampling loop, evidence quadrature, run aggregation
//! * [`walker`]: the replacement search and its rescue strategies
//! * [`cluster`]: mean-shift cluster recognition
//! * [`posterior`]: weighted summaries, credible intervals, histograms
//! * [`bench`]: configuration files, data files, simulation, reports and
//!   K-scaling studies behind the `nestshift` binary

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cluster;
pub mod model;
pub mod nested;
pub mod posterior;
pub mod timing;
pub mod walker;

pub use cluster::{ClusterConfig, GaussianForm, Kernel, MeanShift};
pub use model::{DataKind, Dataset, LogLikelihood, ModelError, ModelSpec, ParameterSpace, SpectrumLikelihood};
pub use nested::{
    combine_runs, run_nested, run_repeated, CombinedEvidence, NestedRun, Quadrature, RunFailure, SamplerConfig,
};
pub use posterior::{ParamSummary, WeightedPosterior};
pub use walker::{ClusterHook, NoClustering, WalkConfig};
