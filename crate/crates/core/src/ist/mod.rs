//! The interval soft-thresholding (IST) covariance estimator.
//!
//! The estimate solves
//!
//! ```text
//! minimize   ½‖Σ − S^l‖²_F + ½‖Σ − S^u‖²_F + λ Σ_{i≠j} |σ_ij|
//! subject to Σ ⪰ εI
//! ```
//!
//! by splitting `Σ = Γ` and alternating a soft-thresholded fit step for `Σ`,
//! an eigenvalue-clamping projection for `Γ`, and a dual ascent step for the
//! multiplier `Λ` (see [`admm`]).

pub mod admm;
pub mod kkt;
pub mod tuning;

pub use admm::{admm_solve, EstimateResult, IstSolver, StepRecord, WarmStart};
pub use kkt::{kkt_residuals, KktReport};
pub use tuning::{lambda_rate, select_lambda_cv, CvOutcome, LambdaRule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Stopping tolerance, either absolute or scaled by the dimension `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    PerDimension(f64),
}

impl Tolerance {
    pub fn resolve(self, p: usize) -> f64 {
        match self {
            Tolerance::Absolute(t) => t,
            Tolerance::PerDimension(t) => t * p as f64,
        }
    }

    fn raw(self) -> f64 {
        match self {
            Tolerance::Absolute(t) | Tolerance::PerDimension(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    /// Off-diagonal ℓ1 penalty.
    pub lambda: f64,
    /// Augmented-Lagrangian penalty parameter; the quadratic term is `1/(2β)`.
    pub beta: f64,
    /// Eigenvalue floor of the estimate.
    pub epsilon: f64,
    /// Bound on `‖Σ − Γ‖_F` at convergence.
    pub tol_primal: Tolerance,
    /// Bound on the D-norm jump between consecutive iterates.
    pub tol_change: Tolerance,
    pub max_iter: usize,
    /// Reserved for randomized tie-breaking; the solver is deterministic.
    pub seed: u64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            beta: 1.0,
            epsilon: 1e-4,
            tol_primal: Tolerance::PerDimension(1e-7),
            tol_change: Tolerance::PerDimension(1e-7),
            max_iter: 5000,
            seed: 0,
        }
    }
}

impl AdmmConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be nonnegative and finite, got {}",
                self.lambda
            )));
        }
        positive("beta", self.beta)?;
        positive("epsilon", self.epsilon)?;
        positive("tol_primal", self.tol_primal.raw())?;
        positive("tol_change", self.tol_change.raw())?;
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Entrywise soft-thresholding of the off-diagonal part; the diagonal passes
/// through unchanged.
pub fn soft_threshold(g: &SymMatrix, eta: f64) -> Result<SymMatrix> {
    if !(eta >= 0.0) {
        return Err(Error::invalid(format!("threshold must be nonnegative, got {eta}")));
    }
    Ok(soft_threshold_unchecked(g, eta))
}

pub(crate) fn soft_threshold_unchecked(g: &SymMatrix, eta: f64) -> SymMatrix {
    g.map_indexed(|i, j, v| if i == j { v } else { shrink(v, eta) })
}

#[inline]
fn shrink(v: f64, eta: f64) -> f64 {
    let m = v.abs() - eta;
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

/// `½‖Σ − S^l‖²_F + ½‖Σ − S^u‖²_F + λ Σ_{i≠j} |σ_ij|`.
pub fn objective(sigma: &SymMatrix, s_l: &SymMatrix, s_u: &SymMatrix, lambda: f64) -> Result<f64> {
    check_dims(sigma, s_l, s_u)?;
    let p = sigma.dim();
    let mut fit = 0.0;
    let mut penalty = 0.0;
    for i in 0..p {
        for j in 0..p {
            let s = sigma.get(i, j);
            let dl = s - s_l.get(i, j);
            let du = s - s_u.get(i, j);
            fit += dl * dl + du * du;
            if i != j {
                penalty += s.abs();
            }
        }
    }
    Ok(0.5 * fit + lambda * penalty)
}

/// `‖(ΔΛ, ΔΣ)‖_D = sqrt(β‖ΔΛ‖²_F + (2/β)‖ΔΣ‖²_F)`.
pub fn d_norm_jump(
    prev: (&SymMatrix, &SymMatrix),
    next: (&SymMatrix, &SymMatrix),
    beta: f64,
) -> f64 {
    let dl = (prev.0 - next.0).frobenius_norm();
    let ds = (prev.1 - next.1).frobenius_norm();
    (beta * dl * dl + (2.0 / beta) * ds * ds).sqrt()
}

fn check_dims(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() || a.dim() != c.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}, {}, {}",
            a.dim(),
            b.dim(),
            c.dim()
        )));
    }
    Ok(())
}
