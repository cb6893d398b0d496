//! Sparse positive-definite covariance estimation from interval-valued data.
//!
//! The estimator lives in [`ist`]; [`synthetic`], [`hfsim`] and [`ingest`]
//! produce [`IntervalMatrix`] inputs for it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hfsim;
pub mod ingest;
pub mod interval;
pub mod io;
pub mod ist;
pub mod matrix;
pub mod rng;
pub mod synthetic;

pub use error::{Error, PdViolation, Result};
pub use interval::{bound_covariances, IntervalMatrix};
pub use ist::{
    admm_solve, kkt_residuals, lambda_rate, objective, select_lambda_cv, soft_threshold, AdmmConfig,
    CvOutcome, EstimateResult, KktReport, LambdaRule, Tolerance,
};
pub use matrix::{cholesky, eigh, frobenius_norm, mvn_sample, psd_project, spectral_norm, EigenSystem, SymMatrix};
pub use rng::{SeedStream, StreamRole};
pub use synthetic::{build_covariance, generate_intervals, CovSpec, CovStructure, Dgp, DgpSpec, NoiseFamily};
