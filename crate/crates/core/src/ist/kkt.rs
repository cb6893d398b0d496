//! Optimality residuals of a solver iterate.
//!
//! At a solution `(Σ*, Γ*, Λ*)` the off-diagonal entries satisfy
//! `(S^l + S^u + Λ − 2Σ)_ij / λ ∈ ∂|σ_ij|`, the diagonal satisfies
//! `(2Σ − S^l − S^u)_ii = Λ_ii`, and `Σ* = Γ* ⪰ εI`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ist::admm::ZERO_THRESHOLD;
use crate::ist::AdmmConfig;
use crate::matrix::{eigh, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Largest off-diagonal subgradient violation. `None` when `λ = 0`,
    /// where the subgradient condition is vacuous.
    pub offdiag_subgrad_max: Option<f64>,
    pub diag_residual_max: f64,
    /// `‖Σ − Γ‖_F`.
    pub primal_gap: f64,
    /// `max(0, ε − λ_min(Γ))`, reported as zero when the shortfall is below
    /// the resolution of the eigensolver.
    pub cone_violation: f64,
}

impl KktReport {
    /// Largest of the reported residuals.
    pub fn max_residual(&self) -> f64 {
        self.offdiag_subgrad_max
            .unwrap_or(0.0)
            .max(self.diag_residual_max)
            .max(self.primal_gap)
            .max(self.cone_violation)
    }
}

pub fn kkt_residuals(
    sigma: &SymMatrix,
    gamma: &SymMatrix,
    dual: &SymMatrix,
    s_l: &SymMatrix,
    s_u: &SymMatrix,
    config: &AdmmConfig,
) -> Result<KktReport> {
    let p = sigma.dim();
    if [gamma.dim(), dual.dim(), s_l.dim(), s_u.dim()].iter().any(|&d| d != p) {
        return Err(Error::invalid("dimension mismatch in KKT inputs"));
    }
    let lambda = config.lambda;
    let mut offdiag: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for i in 0..p {
        for j in i..p {
            let s = sigma.get(i, j);
            let r = s_l.get(i, j) + s_u.get(i, j) + dual.get(i, j) - 2.0 * s;
            if i == j {
                diag = diag.max(r.abs());
            } else if lambda > 0.0 {
                let t = r / lambda;
                let v = if s.abs() > ZERO_THRESHOLD {
                    (t - s.signum()).abs()
                } else {
                    (t.abs() - 1.0).max(0.0)
                };
                offdiag = offdiag.max(v);
            }
        }
    }

    let eig = eigh(gamma)?;
    let (lo, hi) = (eig.min_value(), eig.max_value());
    let resolution = 16.0 * p as f64 * f64::EPSILON * lo.abs().max(hi.abs()).max(config.epsilon);
    let shortfall = config.epsilon - lo;
    let cone_violation = if shortfall > resolution { shortfall } else { 0.0 };

    Ok(KktReport {
        offdiag_subgrad_max: (lambda > 0.0).then_some(offdiag),
        diag_residual_max: diag,
        primal_gap: (sigma - gamma).frobenius_norm(),
        cone_violation,
    })
}
