//! Choosing the penalty level.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{bound_covariances, empirical_covariance, IntervalMatrix};
use crate::ist::admm::{admm_solve, WarmStart};
use crate::ist::AdmmConfig;
use crate::matrix::SymMatrix;

/// `c · sqrt(ln p / n)`.
pub fn lambda_rate(n: usize, p: usize, c: f64) -> f64 {
    c * ((p as f64).ln() / n as f64).sqrt()
}

/// How `λ` is set for a given data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambdaRule {
    Fixed { value: f64 },
    /// `c · sqrt(ln p / n)`.
    Rate { c: f64 },
    /// The rate multiplied by the mean diagonal of `(S^l + S^u)/2`, which
    /// keeps the penalty in the units of the data.
    ScaledRate { c: f64 },
    CrossValidated { grid: Vec<f64>, folds: usize },
}

impl LambdaRule {
    pub fn resolve<R: Rng + ?Sized>(
        &self,
        data: &IntervalMatrix,
        config: &AdmmConfig,
        rng: &mut R,
    ) -> Result<f64> {
        let (n, p) = (data.n(), data.p());
        let rate_pre = |c: f64| {
            if n < 2 || p < 2 {
                return Err(Error::invalid(format!("rate rule needs n, p >= 2, got n={n}, p={p}")));
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::invalid(format!("rate constant must be positive, got {c}")));
            }
            Ok(())
        };
        match self {
            LambdaRule::Fixed { value } => {
                if !(*value >= 0.0) || !value.is_finite() {
                    return Err(Error::invalid(format!("lambda must be nonnegative, got {value}")));
                }
                Ok(*value)
            }
            LambdaRule::Rate { c } => {
                rate_pre(*c)?;
                Ok(lambda_rate(n, p, *c))
            }
            LambdaRule::ScaledRate { c } => {
                rate_pre(*c)?;
                let (s_l, s_u) = bound_covariances(data)?;
                let scale = mean_diagonal(&s_l, &s_u);
                Ok(lambda_rate(n, p, *c) * scale)
            }
            LambdaRule::CrossValidated { grid, folds } => {
                Ok(select_lambda_cv(data, grid, *folds, config, rng)?.lambda)
            }
        }
    }
}

fn mean_diagonal(s_l: &SymMatrix, s_u: &SymMatrix) -> f64 {
    let p = s_l.dim();
    (0..p).map(|i| 0.5 * (s_l.get(i, i) + s_u.get(i, i))).sum::<f64>() / p as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub lambda: f64,
    /// `(λ, mean validation loss)` for each distinct grid value, ascending in `λ`.
    pub losses: Vec<(f64, f64)>,
}

/// K-fold cross-validation over `grid`.
///
/// Rows are shuffled once with `rng`; row at shuffled position `k` goes to
/// fold `k % folds`. Within a fold the grid is solved from the largest `λ`
/// down, each solve warm-started from the previous one.
pub fn select_lambda_cv<R: Rng + ?Sized>(
    data: &IntervalMatrix,
    grid: &[f64],
    folds: usize,
    config: &AdmmConfig,
    rng: &mut R,
) -> Result<CvOutcome> {
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid(format!("grid value {bad} is not a nonnegative number")));
    }
    let n = data.n();
    if n < folds {
        return Err(Error::InsufficientData { needed: folds, got: n });
    }
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas.dedup();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut totals = vec![0.0; lambdas.len()];
    for fold in 0..folds {
        let (mut train, mut valid) = (Vec::new(), Vec::new());
        for (pos, &row) in order.iter().enumerate() {
            if pos % folds == fold {
                valid.push(row);
            } else {
                train.push(row);
            }
        }
        let tr = data.select_rows(&train)?;
        let va = data.select_rows(&valid)?;
        let (tl, tu) = (empirical_covariance(tr.lower()), empirical_covariance(tr.upper()));
        let (vl, vu) = (empirical_covariance(va.lower()), empirical_covariance(va.upper()));

        let mut warm: Option<WarmStart> = None;
        for (k, &lambda) in lambdas.iter().enumerate() {
            let cfg = AdmmConfig {
                lambda,
                ..config.clone()
            };
            let res = admm_solve(&tl, &tu, &cfg, warm.as_ref())?;
            let est = res.estimate();
            let a = (est - &vl).frobenius_norm();
            let b = (est - &vu).frobenius_norm();
            totals[k] += 0.5 * (a * a + b * b);
            warm = Some(res.warm_start());
        }
    }

    // lambdas is descending, so a strict comparison keeps the larger value on ties
    let mut best = 0;
    for k in 1..lambdas.len() {
        if totals[k] < totals[best] {
            best = k;
        }
    }
    let mut losses: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(&totals)
        .map(|(&l, &t)| (l, t / folds as f64))
        .collect();
    losses.reverse();
    Ok(CvOutcome {
        lambda: lambdas[best],
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::standard_normal_matrix;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noisy_data(n: usize, p: usize, seed: u64) -> IntervalMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lower = standard_normal_matrix(n, p, &mut rng);
        let width = standard_normal_matrix(n, p, &mut rng).mapv(f64::abs);
        IntervalMatrix::new(lower.clone(), lower + width).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert_abs_diff_eq!(lambda_rate(100, 100, 1.0), 0.21460, epsilon = 5e-6);
        assert_abs_diff_eq!(lambda_rate(400, 100, 1.0), 0.10730, epsilon = 5e-6);
        assert_abs_diff_eq!(lambda_rate(100, 100, 2.0), 0.42919, epsilon = 5e-6);
    }

    #[test]
    fn singleton_grid() {
        let data = noisy_data(12, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = select_lambda_cv(&data, &[0.3], 3, &AdmmConfig::default(), &mut rng).unwrap();
        assert_eq!(out.lambda, 0.3);
        assert_eq!(out.losses.len(), 1);
    }

    #[test]
    fn duplicates_do_not_matter() {
        let data = noisy_data(20, 4, 2);
        let cfg = AdmmConfig::default();
        let a = select_lambda_cv(&data, &[0.5, 0.01, 0.1], 4, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = select_lambda_cv(&data, &[0.1, 0.5, 0.1, 0.01, 0.5], 4, &cfg, &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_losses_go_to_the_larger_lambda() {
        // Degenerate constant data: every candidate estimates εI and scores the same.
        let data = IntervalMatrix::from_points(ndarray::Array2::ones((6, 2))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = select_lambda_cv(&data, &[0.0, 0.2, 1.0], 2, &AdmmConfig::default(), &mut rng).unwrap();
        assert_eq!(out.lambda, 1.0);
    }

    #[test]
    fn argument_checks() {
        let data = noisy_data(3, 2, 3);
        let cfg = AdmmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            select_lambda_cv(&data, &[0.1], 4, &cfg, &mut rng),
            Err(Error::InsufficientData { needed: 4, got: 3 })
        ));
        assert!(select_lambda_cv(&data, &[], 2, &cfg, &mut rng).is_err());
        assert!(select_lambda_cv(&data, &[-1.0], 2, &cfg, &mut rng).is_err());
        assert!(select_lambda_cv(&data, &[0.1], 1, &cfg, &mut rng).is_err());
    }

    #[test]
    fn rule_resolution() {
        let data = noisy_data(100, 100, 4);
        let cfg = AdmmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rate = LambdaRule::Rate { c: 1.0 }.resolve(&data, &cfg, &mut rng).unwrap();
        assert_abs_diff_eq!(rate, 0.21460, epsilon = 5e-6);
        assert_eq!(LambdaRule::Fixed { value: 0.7 }.resolve(&data, &cfg, &mut rng).unwrap(), 0.7);

        let scaled = data.select_columns(&(0..100).collect::<Vec<_>>());
        let (l, u) = scaled.into_bounds();
        let doubled = IntervalMatrix::new(l * 2.0, u * 2.0).unwrap();
        let a = LambdaRule::ScaledRate { c: 1.0 }.resolve(&data, &cfg, &mut rng).unwrap();
        let b = LambdaRule::ScaledRate { c: 1.0 }.resolve(&doubled, &cfg, &mut rng).unwrap();
        assert_abs_diff_eq!(b, 4.0 * a, epsilon = 1e-12);
    }
}
