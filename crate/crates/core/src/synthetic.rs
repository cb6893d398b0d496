//! Ground-truth covariance structures and interval data-generating processes.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, PdViolation, Result};
use crate::interval::IntervalMatrix;
use crate::matrix::{cholesky, eigh, mvn_sample_with_factor, CholeskyFactor, SymMatrix};
use crate::rng::{SeedStream, StreamRole};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovStructure {
    /// `ρ` on the first off-diagonals, zero beyond.
    Ma1 { rho: f64 },
    /// `ρ^|i−j|`.
    Ar1 { rho: f64 },
    /// Fractional Gaussian noise autocovariance with Hurst index `H`.
    LongRange { hurst: f64 },
}

impl CovStructure {
    pub fn label(&self) -> &'static str {
        match self {
            CovStructure::Ma1 { .. } => "MA1",
            CovStructure::Ar1 { .. } => "AR1",
            CovStructure::LongRange { .. } => "LR",
        }
    }

    /// `ρ` or `H`, whichever the structure uses.
    pub fn parameter(&self) -> f64 {
        match *self {
            CovStructure::Ma1 { rho } | CovStructure::Ar1 { rho } => rho,
            CovStructure::LongRange { hurst } => hurst,
        }
    }

    /// Covariance at lag `k = |i − j|`.
    pub fn lag_covariance(&self, k: usize) -> f64 {
        match *self {
            CovStructure::Ma1 { rho } => match k {
                0 => 1.0,
                1 => rho,
                _ => 0.0,
            },
            CovStructure::Ar1 { rho } => rho.powi(k as i32),
            CovStructure::LongRange { hurst } => {
                if k == 0 {
                    return 1.0;
                }
                let h2 = 2.0 * hurst;
                let k = k as f64;
                0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).powf(h2))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovSpec {
    pub p: usize,
    pub structure: CovStructure,
}

impl CovSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        match self.structure {
            CovStructure::Ma1 { rho } | CovStructure::Ar1 { rho } => {
                if !(rho > -1.0 && rho < 1.0) {
                    return Err(Error::invalid(format!("rho must lie in (-1, 1), got {rho}")));
                }
            }
            CovStructure::LongRange { hurst } => {
                if !(0.5..=1.0).contains(&hurst) {
                    return Err(Error::invalid(format!("Hurst index must lie in [0.5, 1], got {hurst}")));
                }
            }
        }
        Ok(())
    }
}

/// The Toeplitz matrix of `spec`, verified positive definite.
pub fn build_covariance(spec: &CovSpec) -> Result<SymMatrix> {
    spec.validate()?;
    let lags: Vec<f64> = (0..spec.p).map(|k| spec.structure.lag_covariance(k)).collect();
    let cov = SymMatrix::from_fn(spec.p, |i, j| lags[i.abs_diff(j)]);
    let min = eigh(&cov)?.min_value();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(PdViolation::MinEigenvalue(min)));
    }
    Ok(cov)
}

/// Nonnegative noise added to the interval ends in DGP3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    LogNormal { mu: f64, sigma: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, scale: f64 },
    Exponential { rate: f64 },
}

impl NoiseFamily {
    pub const LOGNORMAL: Self = NoiseFamily::LogNormal { mu: 0.0, sigma: 0.5 };
    pub const BETA: Self = NoiseFamily::Beta { alpha: 2.0, beta: 2.0 };
    pub const GAMMA: Self = NoiseFamily::Gamma { shape: 2.0, scale: 0.5 };
    pub const EXPONENTIAL: Self = NoiseFamily::Exponential { rate: 1.0 };

    /// The four families with their default parameters.
    pub const DEFAULTS: [Self; 4] = [Self::LOGNORMAL, Self::BETA, Self::GAMMA, Self::EXPONENTIAL];

    pub fn label(&self) -> &'static str {
        match self {
            NoiseFamily::LogNormal { .. } => "lognormal",
            NoiseFamily::Beta { .. } => "beta",
            NoiseFamily::Gamma { .. } => "gamma",
            NoiseFamily::Exponential { .. } => "exponential",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::DEFAULTS.into_iter().find(|f| f.label() == label)
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseFamily::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - 1.0) * (2.0 * mu + s2).exp()
            }
            NoiseFamily::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            NoiseFamily::Gamma { shape, scale } => shape * scale * scale,
            NoiseFamily::Exponential { rate } => 1.0 / (rate * rate),
        }
    }

    fn sampler(&self) -> Result<NoiseSampler> {
        let bad = |e: &dyn std::fmt::Display| Error::invalid(format!("{} noise: {e}", self.label()));
        Ok(match *self {
            NoiseFamily::LogNormal { mu, sigma } => NoiseSampler::LogNormal(LogNormal::new(mu, sigma).map_err(|e| bad(&e))?),
            NoiseFamily::Beta { alpha, beta } => NoiseSampler::Beta(Beta::new(alpha, beta).map_err(|e| bad(&e))?),
            NoiseFamily::Gamma { shape, scale } => NoiseSampler::Gamma(Gamma::new(shape, scale).map_err(|e| bad(&e))?),
            NoiseFamily::Exponential { rate } => NoiseSampler::Exp(Exp::new(rate).map_err(|e| bad(&e))?),
        })
    }
}

enum NoiseSampler {
    LogNormal(LogNormal<f64>),
    Beta(Beta<f64>),
    Gamma(Gamma<f64>),
    Exp(Exp<f64>),
}

impl NoiseSampler {
    fn matrix<R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
        let mut out = Array2::zeros((rows, cols));
        for v in out.iter_mut() {
            *v = match self {
                NoiseSampler::LogNormal(d) => d.sample(rng),
                NoiseSampler::Beta(d) => d.sample(rng),
                NoiseSampler::Gamma(d) => d.sample(rng),
                NoiseSampler::Exp(d) => d.sample(rng),
            };
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dgp", rename_all = "snake_case")]
pub enum Dgp {
    /// `lower ~ N(0, Σ⁰)`, `upper = lower + constant`.
    Dgp1 { constant: f64 },
    /// Center `~ N(0, Σ⁰)`, bounds at `center ∓ constant`.
    Dgp2 { constant: f64 },
    /// Center `~ N(0, Σ⁰)`, `lower = center − E₁`, `upper = center + E₂`.
    Dgp3 { noise: NoiseFamily },
}

impl Dgp {
    pub fn label(&self) -> &'static str {
        match self {
            Dgp::Dgp1 { .. } => "DGP1",
            Dgp::Dgp2 { .. } => "DGP2",
            Dgp::Dgp3 { .. } => "DGP3",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Dgp::Dgp1 { constant } | Dgp::Dgp2 { constant } => {
                if !(constant > 0.0) || !constant.is_finite() {
                    return Err(Error::invalid(format!("interval constant must be positive, got {constant}")));
                }
            }
            Dgp::Dgp3 { noise } => {
                noise.sampler()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub dgp: Dgp,
    pub cov: CovSpec,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub replication: u64,
}

/// Draws interval samples for a fixed covariance, reusing its Cholesky factor.
#[derive(Debug, Clone)]
pub struct DgpSampler {
    truth: SymMatrix,
    factor: CholeskyFactor,
}

impl DgpSampler {
    pub fn new(cov: &CovSpec) -> Result<Self> {
        Self::from_covariance(build_covariance(cov)?)
    }

    pub fn from_covariance(truth: SymMatrix) -> Result<Self> {
        let factor = cholesky(&truth)?;
        Ok(Self { truth, factor })
    }

    pub fn truth(&self) -> &SymMatrix {
        &self.truth
    }

    /// The center sample is drawn from the `Center` stream and the DGP3
    /// noise from the `LowerNoise`/`UpperNoise` streams, so runs that differ
    /// only in the interval constant share their Gaussian draws.
    pub fn sample(&self, dgp: &Dgp, n: usize, seeds: SeedStream, replication: u64) -> Result<IntervalMatrix> {
        dgp.validate()?;
        if n == 0 {
            return Err(Error::invalid("sample size must be positive"));
        }
        let p = self.truth.dim();
        let center = mvn_sample_with_factor(&self.factor, n, &mut seeds.rng(replication, StreamRole::Center));
        let (lower, upper) = match *dgp {
            Dgp::Dgp1 { constant } => {
                let upper = &center + constant;
                (center, upper)
            }
            Dgp::Dgp2 { constant } => (&center - constant, &center + constant),
            Dgp::Dgp3 { noise } => {
                let sampler = noise.sampler()?;
                let e1 = sampler.matrix(n, p, &mut seeds.rng(replication, StreamRole::LowerNoise));
                let e2 = sampler.matrix(n, p, &mut seeds.rng(replication, StreamRole::UpperNoise));
                (&center - &e1, &center + &e2)
            }
        };
        IntervalMatrix::new(lower, upper)
    }
}

pub fn generate_intervals(spec: &DgpSpec) -> Result<IntervalMatrix> {
    DgpSampler::new(&spec.cov)?.sample(&spec.dgp, spec.n, SeedStream::new(spec.seed), spec.replication)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::bound_covariances;
    use approx::assert_abs_diff_eq;

    fn cov(p: usize, structure: CovStructure) -> SymMatrix {
        build_covariance(&CovSpec { p, structure }).unwrap()
    }

    fn spec(dgp: Dgp, structure: CovStructure, p: usize, n: usize) -> DgpSpec {
        DgpSpec {
            dgp,
            cov: CovSpec { p, structure },
            n,
            seed: 17,
            replication: 0,
        }
    }

    #[test]
    fn structure_examples() {
        let ar = cov(4, CovStructure::Ar1 { rho: 0.5 });
        assert_eq!(ar.get(0, 2), 0.25);
        let ma = cov(4, CovStructure::Ma1 { rho: 0.5 });
        assert_eq!(ma.get(0, 2), 0.0);
        assert_eq!(ma.get(1, 2), 0.5);
        let lr = cov(6, CovStructure::LongRange { hurst: 0.5 });
        assert_eq!(lr, SymMatrix::identity(6));
    }

    #[test]
    fn long_range_lags() {
        // H = 1 is perfectly correlated: ½[(k+1)² − 2k² + (k−1)²] = 1
        let s = CovStructure::LongRange { hurst: 1.0 };
        assert_abs_diff_eq!(s.lag_covariance(3), 1.0, epsilon = 1e-12);
        let s = CovStructure::LongRange { hurst: 0.7 };
        assert_abs_diff_eq!(s.lag_covariance(1), 0.5 * (2f64.powf(1.4) - 2.0), epsilon = 1e-15);
    }

    #[test]
    fn grid_covariances_are_pd() {
        for p in [10, 100] {
            for rho in [0.1, 0.5, 0.9] {
                cov(p, CovStructure::Ar1 { rho });
            }
            for rho in [0.1, 0.5] {
                cov(p, CovStructure::Ma1 { rho });
            }
            for hurst in [0.5, 0.7, 0.9] {
                cov(p, CovStructure::LongRange { hurst });
            }
        }
    }

    #[test]
    fn strong_ma1_is_rejected() {
        // smallest eigenvalue of the tridiagonal is 1 − 2ρ cos(π/(p+1)) < 0
        let p = 100;
        let expected = 1.0 - 1.8 * (std::f64::consts::PI / (p as f64 + 1.0)).cos();
        match build_covariance(&CovSpec { p, structure: CovStructure::Ma1 { rho: 0.9 } }) {
            Err(Error::NotPositiveDefinite(PdViolation::MinEigenvalue(v))) => {
                assert_abs_diff_eq!(v, expected, epsilon = 1e-10)
            }
            other => panic!("expected a PD failure, got {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(CovSpec { p: 3, structure: CovStructure::Ar1 { rho: 1.0 } }.validate().is_err());
        assert!(CovSpec { p: 3, structure: CovStructure::LongRange { hurst: 0.4 } }.validate().is_err());
        assert!(CovSpec { p: 0, structure: CovStructure::Ar1 { rho: 0.1 } }.validate().is_err());
        assert!(Dgp::Dgp1 { constant: 0.0 }.validate().is_err());
        assert!(Dgp::Dgp3 { noise: NoiseFamily::Exponential { rate: -1.0 } }.validate().is_err());
    }

    #[test]
    fn constant_width_dgps() {
        let ar = CovStructure::Ar1 { rho: 0.5 };
        let d1 = generate_intervals(&spec(Dgp::Dgp1 { constant: 3.0 }, ar, 5, 50)).unwrap();
        assert!((&d1.upper() - &d1.lower()).iter().all(|&w| (w - 3.0).abs() < 1e-12));
        let d2 = generate_intervals(&spec(Dgp::Dgp2 { constant: 1.0 }, ar, 5, 50)).unwrap();
        assert!((&d2.upper() - &d2.lower()).iter().all(|&w| (w - 2.0).abs() < 1e-12));
        for d in [&d1, &d2] {
            let (sl, su) = bound_covariances(d).unwrap();
            assert!((&sl - &su).view().iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn constants_share_the_gaussian_draws() {
        let ar = CovStructure::Ar1 { rho: 0.5 };
        let a = generate_intervals(&spec(Dgp::Dgp1 { constant: 0.5 }, ar, 4, 10)).unwrap();
        let b = generate_intervals(&spec(Dgp::Dgp1 { constant: 5.0 }, ar, 4, 10)).unwrap();
        assert_eq!(a.lower(), b.lower());
    }

    #[test]
    fn random_width_is_positive() {
        let s = spec(Dgp::Dgp3 { noise: NoiseFamily::EXPONENTIAL }, CovStructure::Ma1 { rho: 0.5 }, 5, 200);
        let d = generate_intervals(&s).unwrap();
        assert!((&d.upper() - &d.lower()).iter().all(|&w| w > 0.0));
        assert_eq!(generate_intervals(&s).unwrap(), d);
    }

    #[test]
    fn noise_variances() {
        assert_abs_diff_eq!(NoiseFamily::BETA.variance(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(NoiseFamily::GAMMA.variance(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(NoiseFamily::EXPONENTIAL.variance(), 1.0, epsilon = 1e-15);
        // (e^{1/4} − 1) e^{1/4}
        assert_abs_diff_eq!(NoiseFamily::LOGNORMAL.variance(), 0.3646958540, epsilon = 1e-9);
        for f in NoiseFamily::DEFAULTS {
            assert_eq!(NoiseFamily::from_label(f.label()), Some(f));
        }
    }
}
