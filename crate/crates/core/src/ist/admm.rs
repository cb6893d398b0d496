//! Alternating-direction solver.
//!
//! One iteration, given `(Σ, Γ, Λ)`:
//!
//! ```text
//! Σ ← S(β(S^l + S^u + Λ) + Γ, βλ) / (2β + 1)     soft-threshold off-diagonal
//! Γ ← (Σ − βΛ)_+                                  clamp eigenvalues at ε
//! Λ ← Λ − (Σ − Γ) / β
//! ```
//!
//! The returned estimate is `Γ`, which lies in `{Γ ⪰ εI}` by construction;
//! `Σ` carries the exact sparsity pattern and agrees with `Γ` up to the
//! primal residual.

use crate::error::{Error, Result};
use crate::ist::kkt::{kkt_residuals, KktReport};
use crate::ist::{check_dims, d_norm_jump, soft_threshold_unchecked, AdmmConfig};
use crate::matrix::{eigh, psd_project, SymMatrix};

/// Entries with magnitude at or below this count as zero in support counts
/// and subgradient checks.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Starting point `(Γ⁰, Λ⁰)` for a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub gamma: SymMatrix,
    pub dual: SymMatrix,
}

/// Diagnostics of a single iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// `‖Σ⁽q+1⁾ − Γ⁽q+1⁾‖_F`.
    pub primal_residual: f64,
    /// `‖U⁽q⁾ − U⁽q+1⁾‖_D` with `U = (Λ, Σ)`.
    pub d_norm_jump: f64,
}

/// Iterate-level access to the solver, for callers that need every iterate.
#[derive(Debug, Clone)]
pub struct IstSolver<'a> {
    s_l: &'a SymMatrix,
    s_u: &'a SymMatrix,
    config: AdmmConfig,
    bound_sum: SymMatrix,
    sigma: SymMatrix,
    gamma: SymMatrix,
    dual: SymMatrix,
    iterations: usize,
}

impl<'a> IstSolver<'a> {
    /// Without a warm start, `Γ⁰ = ((S^l + S^u)/2)_+`, `Λ⁰ = 0`. In both cases
    /// `Σ⁰ = Γ⁰`.
    pub fn new(
        s_l: &'a SymMatrix,
        s_u: &'a SymMatrix,
        config: &AdmmConfig,
        warm_start: Option<&WarmStart>,
    ) -> Result<Self> {
        config.validate()?;
        check_dims(s_l, s_u, s_l)?;
        if !s_l.is_finite() || !s_u.is_finite() {
            return Err(Error::invalid("covariance inputs have non-finite entries"));
        }
        let bound_sum = s_l + s_u;
        let (gamma, dual) = match warm_start {
            Some(w) => {
                if w.gamma.dim() != s_l.dim() || w.dual.dim() != s_l.dim() {
                    return Err(Error::invalid("warm start dimension mismatch"));
                }
                (w.gamma.clone(), w.dual.clone())
            }
            None => (
                psd_project(&(&bound_sum * 0.5), config.epsilon)?,
                SymMatrix::zeros(s_l.dim()),
            ),
        };
        Ok(Self {
            s_l,
            s_u,
            config: config.clone(),
            bound_sum,
            sigma: gamma.clone(),
            gamma,
            dual,
            iterations: 0,
        })
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let beta = self.config.beta;
        let lambda = self.config.lambda;

        let fit_target = &(&(&self.bound_sum + &self.dual) * beta) + &self.gamma;
        let sigma = &soft_threshold_unchecked(&fit_target, beta * lambda) * (1.0 / (2.0 * beta + 1.0));
        let gamma = psd_project(&(&sigma - &(&self.dual * beta)), self.config.epsilon)?;
        let gap = &sigma - &gamma;
        let dual = &self.dual - &(&gap * (1.0 / beta));

        let record = StepRecord {
            primal_residual: gap.frobenius_norm(),
            d_norm_jump: d_norm_jump((&self.dual, &self.sigma), (&dual, &sigma), beta),
        };
        self.sigma = sigma;
        self.gamma = gamma;
        self.dual = dual;
        self.iterations += 1;
        Ok(record)
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn gamma(&self) -> &SymMatrix {
        &self.gamma
    }

    pub fn dual(&self) -> &SymMatrix {
        &self.dual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn config(&self) -> &AdmmConfig {
        &self.config
    }

    fn finish(self, converged: bool, primal: Vec<f64>, change: Vec<f64>) -> Result<EstimateResult> {
        let kkt = kkt_residuals(&self.sigma, &self.gamma, &self.dual, self.s_l, self.s_u, &self.config)?;
        let min_eigenvalue = eigh(&self.gamma)?.min_value();
        debug_assert!(min_eigenvalue >= self.config.epsilon - 1e-8);
        Ok(EstimateResult {
            sigma: self.sigma,
            gamma: self.gamma,
            dual: self.dual,
            iterations: self.iterations,
            converged,
            primal_residual_trace: primal,
            change_trace: change,
            kkt,
            min_eigenvalue,
            lambda: self.config.lambda,
            epsilon: self.config.epsilon,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// Sparse iterate `Σ*`.
    pub sigma: SymMatrix,
    /// PSD-certified iterate `Γ*`, the estimate.
    pub gamma: SymMatrix,
    /// Multiplier `Λ*`.
    pub dual: SymMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual_trace: Vec<f64>,
    pub change_trace: Vec<f64>,
    pub kkt: KktReport,
    /// Smallest eigenvalue of `Γ*`.
    pub min_eigenvalue: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

impl EstimateResult {
    pub fn estimate(&self) -> &SymMatrix {
        &self.gamma
    }

    /// Nonzero off-diagonal entries of `Σ*` (both triangles).
    pub fn support_size(&self) -> usize {
        self.sigma.offdiag_support(ZERO_THRESHOLD)
    }

    pub fn warm_start(&self) -> WarmStart {
        WarmStart {
            gamma: self.gamma.clone(),
            dual: self.dual.clone(),
        }
    }
}

/// Runs the solver until both the primal residual and the D-norm jump are
/// within tolerance, or `max_iter` iterations have run. Hitting the
/// iteration cap is not an error: the result comes back with
/// `converged == false`.
pub fn admm_solve(
    s_l: &SymMatrix,
    s_u: &SymMatrix,
    config: &AdmmConfig,
    warm_start: Option<&WarmStart>,
) -> Result<EstimateResult> {
    let mut solver = IstSolver::new(s_l, s_u, config, warm_start)?;
    let tol_primal = config.tol_primal.resolve(s_l.dim());
    let tol_change = config.tol_change.resolve(s_l.dim());
    let mut primal = Vec::new();
    let mut change = Vec::new();
    let mut converged = false;
    while solver.iterations() < config.max_iter {
        let rec = solver.step()?;
        primal.push(rec.primal_residual);
        change.push(rec.d_norm_jump);
        if rec.primal_residual <= tol_primal && rec.d_norm_jump <= tol_change {
            converged = true;
            break;
        }
    }
    solver.finish(converged, primal, change)
}
