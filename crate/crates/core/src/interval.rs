//! Interval-valued observations and their bound covariances.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// `n` observations of `p` interval-valued variables, stored as a pair of
/// `n × p` bound matrices with `lower <= upper` entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    lower: Array2<f64>,
    upper: Array2<f64>,
}

impl IntervalMatrix {
    pub fn new(lower: Array2<f64>, upper: Array2<f64>) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::invalid(format!(
                "bound matrices differ in shape: {:?} vs {:?}",
                lower.dim(),
                upper.dim()
            )));
        }
        let (n, p) = lower.dim();
        if n == 0 || p == 0 {
            return Err(Error::invalid("interval matrix must have at least one row and column"));
        }
        for ((idx, &l), &u) in lower.indexed_iter().zip(upper.iter()) {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::invalid(format!("non-finite bound at {idx:?}")));
            }
            if l > u {
                return Err(Error::invalid(format!(
                    "lower bound {l} exceeds upper bound {u} at {idx:?}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Degenerate intervals `[x, x]`.
    pub fn from_points(points: Array2<f64>) -> Result<Self> {
        Self::new(points.clone(), points)
    }

    pub fn n(&self) -> usize {
        self.lower.nrows()
    }

    pub fn p(&self) -> usize {
        self.lower.ncols()
    }

    pub fn lower(&self) -> ArrayView2<'_, f64> {
        self.lower.view()
    }

    pub fn upper(&self) -> ArrayView2<'_, f64> {
        self.upper.view()
    }

    pub fn into_bounds(self) -> (Array2<f64>, Array2<f64>) {
        (self.lower, self.upper)
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("row selection is empty"));
        }
        Ok(Self {
            lower: self.lower.select(Axis(0), rows),
            upper: self.upper.select(Axis(0), rows),
        })
    }

    /// Column `k` of the result is column `perm[k]` of `self`.
    pub fn select_columns(&self, perm: &[usize]) -> Self {
        Self {
            lower: self.lower.select(Axis(1), perm),
            upper: self.upper.select(Axis(1), perm),
        }
    }
}

/// Empirical covariances `(S^l, S^u)` of the lower and upper bound matrices,
/// normalized by `1/n`.
pub fn bound_covariances(data: &IntervalMatrix) -> Result<(SymMatrix, SymMatrix)> {
    if data.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.n(),
        });
    }
    Ok((
        empirical_covariance(data.lower()),
        empirical_covariance(data.upper()),
    ))
}

/// `(1/n) Σ_k (x_k - x̄)(x_k - x̄)ᵀ`. Defined for any `n >= 1`.
pub(crate) fn empirical_covariance(x: ArrayView2<'_, f64>) -> SymMatrix {
    let n = x.nrows() as f64;
    let mean = x.mean_axis(Axis(0)).expect("at least one row");
    let centered = &x - &mean.view().insert_axis(Axis(0));
    SymMatrix::symmetrized(centered.t().dot(&centered) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::matrix::{eigh, standard_normal_matrix};

    #[test]
    fn rejects_inverted_and_non_finite_bounds() {
        assert!(IntervalMatrix::new(array![[1.0]], array![[0.5]]).is_err());
        assert!(IntervalMatrix::new(array![[f64::NAN]], array![[0.5]]).is_err());
        assert!(IntervalMatrix::new(array![[0.0, 1.0]], array![[0.5]]).is_err());
    }

    #[test]
    fn single_variable_example() {
        let data = IntervalMatrix::new(array![[1.0], [-1.0]], array![[2.0], [0.0]]).unwrap();
        let (sl, su) = bound_covariances(&data).unwrap();
        assert_eq!(sl.get(0, 0), 1.0);
        assert_eq!(su.get(0, 0), 1.0);
    }

    #[test]
    fn degenerate_intervals_give_equal_covariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = IntervalMatrix::from_points(standard_normal_matrix(20, 4, &mut rng)).unwrap();
        let (sl, su) = bound_covariances(&data).unwrap();
        assert_eq!(sl, su);
    }

    #[test]
    fn needs_two_rows() {
        let data = IntervalMatrix::from_points(array![[1.0, 2.0]]).unwrap();
        assert!(matches!(
            bound_covariances(&data),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    fn double_loop_cov(x: ArrayView2<'_, f64>) -> Array2<f64> {
        let (n, p) = x.dim();
        let mut out = Array2::zeros((p, p));
        for i in 0..p {
            for j in 0..p {
                let (mut sij, mut si, mut sj) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    sij += x[[k, i]] * x[[k, j]];
                    si += x[[k, i]];
                    sj += x[[k, j]];
                }
                let nf = n as f64;
                out[[i, j]] = sij / nf - (si / nf) * (sj / nf);
            }
        }
        out
    }

    #[test]
    fn matches_double_loop_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let lower = standard_normal_matrix(5, 3, &mut rng);
        let width = standard_normal_matrix(5, 3, &mut rng).mapv(f64::abs);
        let data = IntervalMatrix::new(lower.clone(), &lower + &width).unwrap();
        let (sl, su) = bound_covariances(&data).unwrap();
        let ol = double_loop_cov(data.lower());
        let ou = double_loop_cov(data.upper());
        for i in 0..3 {
            for j in 0..3 {
                assert!((sl.get(i, j) - ol[[i, j]]).abs() < 1e-12);
                assert!((su.get(i, j) - ou[[i, j]]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn shift_invariance_and_psd(seed in any::<u64>(), shift in -50.0f64..50.0, n in 2usize..30, p in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lower = standard_normal_matrix(n, p, &mut rng);
            let upper = &lower + &standard_normal_matrix(n, p, &mut rng).mapv(f64::abs);
            let base = IntervalMatrix::new(lower.clone(), upper.clone()).unwrap();
            let shifted = IntervalMatrix::new(lower - shift.abs(), upper).unwrap();
            let (sl, su) = bound_covariances(&base).unwrap();
            let (sl2, su2) = bound_covariances(&shifted).unwrap();
            prop_assert!((&sl - &sl2).frobenius_norm() <= 1e-10 * sl.frobenius_norm().max(1.0));
            prop_assert_eq!(su, su2.clone());
            prop_assert!(eigh(&sl).unwrap().min_value() >= -1e-10);
            prop_assert!(eigh(&su2).unwrap().min_value() >= -1e-10);
        }
    }
}
