//! File-driven analyses: configuration and data files, synthetic spectra,
//! multi-seed runs with their reports, and K-scaling studies.

pub mod benchmarks;
pub mod config;
pub mod data;
pub mod kscan;
pub mod run;
