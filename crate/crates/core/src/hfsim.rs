//! One-second Gaussian diffusion paths aggregated into block intervals.

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{bound_covariances, IntervalMatrix};
use crate::ist::{admm_solve, AdmmConfig, LambdaRule};
use crate::matrix::{cholesky, mvn_sample_with_factor, spectral_norm, SymMatrix};
use crate::rng::{SeedStream, StreamRole};
use crate::synthetic::{build_covariance, CovSpec, CovStructure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfSimSpec {
    pub p: usize,
    /// Correlation `ρ^|i−j|` between assets `i` and `j`.
    pub rho: f64,
    pub n_seconds: usize,
    pub block_seconds: usize,
    pub seed: u64,
    #[serde(default)]
    pub replication: u64,
}

impl HfSimSpec {
    pub const DEFAULT_SECONDS: usize = 23_400;
    pub const DEFAULT_BLOCK: usize = 300;

    pub fn new(p: usize, rho: f64, seed: u64) -> Self {
        Self {
            p,
            rho,
            n_seconds: Self::DEFAULT_SECONDS,
            block_seconds: Self::DEFAULT_BLOCK,
            seed,
            replication: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cov_spec().validate()?;
        if self.n_seconds < 2 || self.block_seconds == 0 {
            return Err(Error::invalid("need at least two seconds and a positive block length"));
        }
        if !self.n_seconds.is_multiple_of(self.block_seconds) {
            return Err(Error::invalid(format!(
                "{} seconds do not split into blocks of {}",
                self.n_seconds, self.block_seconds
            )));
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.n_seconds / self.block_seconds
    }

    fn cov_spec(&self) -> CovSpec {
        CovSpec {
            p: self.p,
            structure: CovStructure::Ar1 { rho: self.rho },
        }
    }

    /// Unit-volatility Toeplitz covariance of the increments per unit time.
    pub fn covariance(&self) -> Result<SymMatrix> {
        build_covariance(&self.cov_spec())
    }
}

/// `n_seconds × p` path matrix. Row 0 is zero and row `t` is the sum of
/// the first `t` increments, each `N(0, Σ Δt)` with `Δt = 1/n_seconds`.
pub fn simulate_paths(spec: &HfSimSpec) -> Result<Array2<f64>> {
    spec.validate()?;
    let factor = cholesky(&spec.covariance()?)?;
    let mut rng = SeedStream::new(spec.seed).rng(spec.replication, StreamRole::Paths);
    let mut increments = mvn_sample_with_factor(&factor, spec.n_seconds - 1, &mut rng);
    increments *= (1.0 / spec.n_seconds as f64).sqrt();

    let mut paths = Array2::zeros((spec.n_seconds, spec.p));
    for t in 1..spec.n_seconds {
        for j in 0..spec.p {
            paths[[t, j]] = paths[[t - 1, j]] + increments[[t - 1, j]];
        }
    }
    Ok(paths)
}

/// One interval per asset and block of `block_seconds` rows: the range of the
/// path within the block after subtracting its first value.
pub fn block_aggregate(paths: ArrayView2<'_, f64>, block_seconds: usize) -> Result<IntervalMatrix> {
    let (rows, p) = paths.dim();
    if block_seconds == 0 || rows == 0 || rows % block_seconds != 0 {
        return Err(Error::invalid(format!(
            "{rows} rows do not split into blocks of {block_seconds}"
        )));
    }
    let n = rows / block_seconds;
    let mut lower = Array2::zeros((n, p));
    let mut upper = Array2::zeros((n, p));
    for b in 0..n {
        let block = paths.slice(s![b * block_seconds..(b + 1) * block_seconds, ..]);
        for j in 0..p {
            let col = block.column(j);
            let first = col[0];
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for &v in col.iter() {
                let d = v - first;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            lower[[b, j]] = lo;
            upper[[b, j]] = hi;
        }
    }
    IntervalMatrix::new(lower, upper)
}

pub fn simulate_intervals(spec: &HfSimSpec) -> Result<IntervalMatrix> {
    block_aggregate(simulate_paths(spec)?.view(), spec.block_seconds)
}

/// Ratio between the block-range covariances and `Σ`, estimated as the mean
/// diagonal of `S^l` on one calibration run. Unit marginal volatilities make
/// the mean diagonal of `Σ` equal to 1.
pub fn calibrate_scale(spec: &HfSimSpec) -> Result<f64> {
    let calib = HfSimSpec {
        seed: SeedStream::new(spec.seed).derive("calibration").seed(),
        replication: 0,
        ..*spec
    };
    let (s_l, _) = bound_covariances(&simulate_intervals(&calib)?)?;
    Ok(s_l.diagonal().iter().sum::<f64>() / spec.p as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedRep {
    pub lambda: f64,
    /// `‖Σ̂/c − Σ‖_F`.
    pub frobenius: f64,
    /// `‖Σ̂/c − Σ‖_2`.
    pub spectral: f64,
    /// `‖Σ̂ − Σ‖_F` without rescaling.
    pub raw_frobenius: f64,
    pub iterations: usize,
    pub converged: bool,
    pub support_size: usize,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedRow {
    pub p: usize,
    pub rho: f64,
    pub n_blocks: usize,
    /// Calibrated scale `c`; the target is `cΣ`.
    pub scale: f64,
    pub reps: Vec<GuidedRep>,
    pub mean_frobenius: f64,
    pub mean_raw_frobenius: f64,
}

/// Replications `0..reps` of simulate, aggregate and estimate, scored
/// against `cΣ` in the units of `Σ`.
pub fn run_guided_experiment(
    spec: &HfSimSpec,
    config: &AdmmConfig,
    rule: &LambdaRule,
    reps: usize,
) -> Result<GuidedRow> {
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    spec.validate()?;
    let truth = spec.covariance()?;
    let scale = calibrate_scale(spec)?;
    let out = (0..reps as u64)
        .map(|r| guided_replication(spec, &truth, scale, config, rule, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(spec, scale, out))
}

/// Assembles a row from replications run elsewhere.
pub fn summarize(spec: &HfSimSpec, scale: f64, reps: Vec<GuidedRep>) -> GuidedRow {
    let k = reps.len() as f64;
    GuidedRow {
        p: spec.p,
        rho: spec.rho,
        n_blocks: spec.n_blocks(),
        scale,
        mean_frobenius: reps.iter().map(|r| r.frobenius).sum::<f64>() / k,
        mean_raw_frobenius: reps.iter().map(|r| r.raw_frobenius).sum::<f64>() / k,
        reps,
    }
}

/// A single replication of [`run_guided_experiment`], exposed so callers can
/// schedule replications themselves.
pub fn guided_replication(
    spec: &HfSimSpec,
    truth: &SymMatrix,
    scale: f64,
    config: &AdmmConfig,
    rule: &LambdaRule,
    replication: u64,
) -> Result<GuidedRep> {
    let rep_spec = HfSimSpec { replication, ..*spec };
    let data = simulate_intervals(&rep_spec)?;
    let seeds = SeedStream::new(spec.seed);
    let lambda = rule.resolve(&data, config, &mut seeds.rng(replication, StreamRole::FoldSplit))?;
    let (s_l, s_u) = bound_covariances(&data)?;
    let res = admm_solve(&s_l, &s_u, &AdmmConfig { lambda, ..config.clone() }, None)?;
    let est = res.estimate();
    let rescaled_err = &(est * (1.0 / scale)) - truth;
    Ok(GuidedRep {
        lambda,
        frobenius: rescaled_err.frobenius_norm(),
        spectral: spectral_norm(&rescaled_err)?,
        raw_frobenius: (est - truth).frobenius_norm(),
        iterations: res.iterations,
        converged: res.converged,
        support_size: res.support_size(),
        min_eigenvalue: res.min_eigenvalue,
    })
}
