//! Dense symmetric linear algebra.
//!
//! [`SymMatrix`] is the one matrix type the estimator works in. It is stored
//! densely and is exactly symmetric: every constructor either mirrors its
//! input or symmetrizes it as `(A + Aᵀ)/2` after checking that the asymmetry
//! is at rounding level.

use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, PdViolation, Result};

/// Relative asymmetry accepted (and then averaged away) by [`SymMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: Array2<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from a square array.
    ///
    /// Fails if the array is empty, not square, or if
    /// `max |a_ij - a_ji| > 1e-8 * max(1, ||A||_F)`. Accepted input is
    /// replaced by `(A + Aᵀ)/2`. Non-finite entries are allowed here so that
    /// downstream operations can report them; they must appear symmetrically.
    pub fn new(a: Array2<f64>) -> Result<Self> {
        let (rows, cols) = a.dim();
        if rows == 0 || rows != cols {
            return Err(Error::invalid(format!(
                "expected a nonempty square matrix, got {rows}x{cols}"
            )));
        }
        let scale = SYMMETRY_TOLERANCE * frobenius(a.view()).max(1.0);
        let mut worst = 0.0_f64;
        for i in 0..rows {
            for j in (i + 1)..rows {
                let (x, y) = (a[[i, j]], a[[j, i]]);
                if x.is_finite() && y.is_finite() {
                    worst = worst.max((x - y).abs());
                } else if !(x == y || (x.is_nan() && y.is_nan())) {
                    return Err(Error::invalid(format!(
                        "non-finite entries at ({i},{j}) are not symmetric"
                    )));
                }
            }
        }
        if worst > scale {
            return Err(Error::invalid(format!(
                "matrix is not symmetric: max asymmetry {worst:e} exceeds {scale:e}"
            )));
        }
        Ok(Self::symmetrized(a))
    }

    /// Builds from row slices; see [`SymMatrix::new`].
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("rows must all have length equal to the row count"));
        }
        Self::new(Array2::from_shape_fn((p, p), |(i, j)| rows[i][j]))
    }

    /// Evaluates `f` on the upper triangle and mirrors it.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let mut data = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[[i, j]] = v;
                data[[j, i]] = v;
            }
        }
        Self { data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| 0.0)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Averages `a` with its transpose without any tolerance check.
    pub(crate) fn symmetrized(a: Array2<f64>) -> Self {
        let mut data = a;
        let p = data.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (data[[i, j]] + data[[j, i]]);
                data[[i, j]] = v;
                data[[j, i]] = v;
            }
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.data.diag().to_vec()
    }

    /// Applies `f(i, j, value)` to every entry; `f` must itself be symmetric
    /// in `(i, j)` for the result to stay exactly symmetric, so only the upper
    /// triangle is evaluated.
    pub fn map_indexed(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        Self::from_fn(self.dim(), |i, j| f(i, j, self.data[[i, j]]))
    }

    /// `P A Pᵀ` where `perm[k]` is the original index placed at position `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim());
        Self::from_fn(self.dim(), |i, j| self.data[[perm[i], perm[j]]])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Off-diagonal entries with `|a_ij| > threshold`, counting both triangles.
    pub fn offdiag_support(&self, threshold: f64) -> usize {
        let p = self.dim();
        let mut count = 0;
        for i in 0..p {
            for j in 0..p {
                if i != j && self.data[[i, j]].abs() > threshold {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(self.data.view())
    }

    fn check_same_dim(&self, other: &SymMatrix) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
    }
}

fn frobenius(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same_dim(rhs);
        SymMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same_dim(rhs);
        SymMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix {
            data: &self.data * rhs,
        }
    }
}

/// Full symmetric eigendecomposition.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues, nonincreasing.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: Array2<f64>,
}

impl EigenSystem {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let scaled: Array1<f64> = self.values.iter().map(|&v| f(v)).collect();
        let weighted = &self.vectors * &scaled.view().insert_axis(Axis(0));
        SymMatrix::symmetrized(weighted.dot(&self.vectors.t()))
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|v| v)
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("eigensystem is never empty")
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }
}

/// Symmetric eigendecomposition (backed by faer's self-adjoint solver).
pub fn eigh(a: &SymMatrix) -> Result<EigenSystem> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let p = a.dim();
    let m = faer::Mat::<f64>::from_fn(p, p, |i, j| a.data[[i, j]]);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::invalid(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let values = (0..p).rev().map(|k| s[k]).collect();
    let vectors = Array2::from_shape_fn((p, p), |(i, k)| u[(i, p - 1 - k)]);
    Ok(EigenSystem { values, vectors })
}

/// Projection onto `{X : X ⪰ εI}` in Frobenius norm: clamps every eigenvalue
/// from below at `epsilon`. Input already inside the cone is returned as is.
pub fn psd_project(a: &SymMatrix, epsilon: f64) -> Result<SymMatrix> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be a finite nonnegative number, got {epsilon}"
        )));
    }
    let eig = eigh(a)?;
    if eig.min_value() >= epsilon {
        return Ok(a.clone());
    }
    Ok(eig.reconstruct_with(|v| v.max(epsilon)))
}

pub fn frobenius_norm(a: &SymMatrix) -> f64 {
    a.frobenius_norm()
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &SymMatrix) -> Result<f64> {
    let eig = eigh(a)?;
    Ok(eig.max_value().abs().max(eig.min_value().abs()))
}

/// Lower-triangular `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: Array2<f64>,
}

impl CholeskyFactor {
    pub fn lower(&self) -> ArrayView2<'_, f64> {
        self.lower.view()
    }

    pub fn into_lower(self) -> Array2<f64> {
        self.lower
    }

    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::symmetrized(self.lower.dot(&self.lower.t()))
    }
}

pub fn cholesky(a: &SymMatrix) -> Result<CholeskyFactor> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let p = a.dim();
    let mut l = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let mut pivot = a.data[[j, j]];
        for k in 0..j {
            pivot -= l[[j, k]] * l[[j, k]];
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite(PdViolation::Pivot {
                index: j,
                value: pivot,
            }));
        }
        let d = pivot.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..p {
            let mut s = a.data[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// `n` i.i.d. rows from `N(0, cov)`.
///
/// Standard normals are drawn in row-major order and mapped through the
/// Cholesky factor, so the output is a pure function of the generator state.
pub fn mvn_sample<R: Rng + ?Sized>(cov: &SymMatrix, n: usize, rng: &mut R) -> Result<Array2<f64>> {
    let factor = cholesky(cov)?;
    Ok(mvn_sample_with_factor(&factor, n, rng))
}

pub fn mvn_sample_with_factor<R: Rng + ?Sized>(
    factor: &CholeskyFactor,
    n: usize,
    rng: &mut R,
) -> Array2<f64> {
    let p = factor.lower.nrows();
    let z = standard_normal_matrix(n, p, rng);
    z.dot(&factor.lower.t())
}

pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Array2<f64> {
    let mut z = Array2::<f64>::zeros((rows, cols));
    for v in z.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(rows).unwrap()
    }

    fn assert_close(a: &SymMatrix, b: &SymMatrix, tol: f64) {
        let d = (a - b).frobenius_norm();
        assert!(d <= tol, "matrices differ by {d:e}:\n{:?}\n{:?}", a.view(), b.view());
    }

    #[test]
    fn constructor_symmetrizes_small_asymmetry() {
        let a = SymMatrix::from_rows(&[&[1.0, 2.0 + 1e-12], &[2.0, 1.0]]).unwrap();
        assert_eq!(a.get(0, 1), a.get(1, 0));
        assert!(SymMatrix::from_rows(&[&[1.0, 2.0], &[2.1, 1.0]]).is_err());
        assert!(SymMatrix::new(Array2::zeros((0, 0))).is_err());
        assert!(SymMatrix::new(Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn eigh_examples() {
        let e = eigh(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values.len(), 3);
        for v in &e.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }

        let e = eigh(&SymMatrix::from_diagonal(&[3.0, -4.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], -4.0, epsilon = 1e-14);

        let e = eigh(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // eigenvector signs are arbitrary
        let v0 = e.vectors.column(0);
        assert_abs_diff_eq!((v0[0] * v0[1]).abs(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(v0[0].abs(), r, epsilon = 1e-14);
        assert!(v0[0] * v0[1] > 0.0);
        let v1 = e.vectors.column(1);
        assert!(v1[0] * v1[1] < 0.0);
    }

    #[test]
    fn eigh_rejects_non_finite() {
        let a = SymMatrix::from_fn(2, |i, j| if i == j { f64::NAN } else { 0.0 });
        assert!(matches!(eigh(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn psd_project_examples() {
        let i4 = SymMatrix::identity(4);
        assert_close(&psd_project(&i4, 1e-4).unwrap(), &i4, 0.0);

        let p = psd_project(&SymMatrix::from_diagonal(&[2.0, -1.0]), 0.1).unwrap();
        assert_close(&p, &SymMatrix::from_diagonal(&[2.0, 0.1]), 1e-14);

        let p = psd_project(&sym(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.1).unwrap();
        assert_close(&p, &sym(&[&[0.55, 0.45], &[0.45, 0.55]]), 1e-14);

        assert!(psd_project(&i4, -1.0).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(frobenius_norm(&SymMatrix::zeros(3)), 0.0);
        assert_eq!(frobenius_norm(&SymMatrix::identity(4)), 2.0);
        assert_eq!(frobenius_norm(&SymMatrix::from_diagonal(&[3.0, 4.0])), 5.0);

        assert_abs_diff_eq!(
            spectral_norm(&SymMatrix::from_diagonal(&[3.0, -4.0])).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(spectral_norm(&SymMatrix::identity(5)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            spectral_norm(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SymMatrix::identity(3)).unwrap();
        assert_eq!(l.lower(), Array2::<f64>::eye(3).view());

        let l = cholesky(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(l.lower(), ndarray::array![[2.0, 0.0], [0.0, 3.0]].view());

        let l = cholesky(&sym(&[&[4.0, 2.0], &[2.0, 5.0]])).unwrap();
        assert_eq!(l.lower(), ndarray::array![[2.0, 0.0], [1.0, 2.0]].view());
    }

    #[test]
    fn cholesky_reports_pivot() {
        let err = cholesky(&sym(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap_err();
        match err {
            Error::NotPositiveDefinite(PdViolation::Pivot { index, value }) => {
                assert_eq!(index, 1);
                assert_abs_diff_eq!(value, -3.0, epsilon = 1e-14);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn sample_cov(x: &Array2<f64>) -> Array2<f64> {
        let n = x.nrows() as f64;
        x.t().dot(x) / n
    }

    #[test]
    fn mvn_identity_sample_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = mvn_sample(&SymMatrix::identity(2), 100_000, &mut rng).unwrap();
        let s = sample_cov(&x);
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((s[[i, j]] - target).abs() < 0.05, "entry ({i},{j}) = {}", s[[i, j]]);
            }
        }
        let mean = x.mean_axis(Axis(0)).unwrap();
        assert!(mean.iter().all(|m| m.abs() < 0.02));
    }

    #[test]
    fn mvn_diagonal_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = mvn_sample(&SymMatrix::from_diagonal(&[4.0, 1.0]), 100_000, &mut rng).unwrap();
        let s = sample_cov(&x);
        assert!((s[[0, 0]] / 4.0 - 1.0).abs() < 0.05);
        assert!((s[[1, 1]] - 1.0).abs() < 0.05);
    }

    #[test]
    fn mvn_is_deterministic() {
        let cov = sym(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let a = mvn_sample(&cov, 50, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = mvn_sample(&cov, 50, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(mvn_sample(&sym(&[&[1.0, 2.0], &[2.0, 1.0]]), 3, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
    }

    fn random_sym(p: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = standard_normal_matrix(p, p, &mut rng);
        SymMatrix::symmetrized(&z + &z.t())
    }

    fn random_orthogonal(p: usize, seed: u64) -> Array2<f64> {
        eigh(&random_sym(p, seed ^ 0xabcdef)).unwrap().vectors
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigensystem_contract(p in 1usize..12, seed in any::<u64>()) {
            let a = random_sym(p, seed);
            let e = eigh(&a).unwrap();
            let scale = a.frobenius_norm().max(1.0);
            prop_assert!((&e.reconstruct() - &a).frobenius_norm() <= 1e-8 * scale);
            let gram = e.vectors.t().dot(&e.vectors) - Array2::<f64>::eye(p);
            prop_assert!(frobenius(gram.view()) <= 1e-8 * p as f64);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn psd_project_is_idempotent(p in 1usize..10, seed in any::<u64>(), eps in 0.0f64..0.5) {
            let a = random_sym(p, seed);
            let once = psd_project(&a, eps).unwrap();
            let twice = psd_project(&once, eps).unwrap();
            prop_assert!((&once - &twice).frobenius_norm() <= 1e-9 * once.frobenius_norm().max(1.0));
            prop_assert!(eigh(&once).unwrap().min_value() >= eps - 1e-10);
        }

        #[test]
        fn psd_project_commutes_with_rotation(p in 1usize..9, seed in any::<u64>(), eps in 0.0f64..0.5) {
            let a = random_sym(p, seed);
            let q = random_orthogonal(p, seed);
            let rotated = SymMatrix::symmetrized(q.dot(&a.view()).dot(&q.t()));
            let lhs = psd_project(&rotated, eps).unwrap();
            let rhs = SymMatrix::symmetrized(q.dot(&psd_project(&a, eps).unwrap().view()).dot(&q.t()));
            prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-8 * a.frobenius_norm().max(1.0));
        }

        #[test]
        fn frobenius_matches_spectrum(p in 1usize..12, seed in any::<u64>()) {
            let a = random_sym(p, seed);
            let f2 = a.frobenius_norm().powi(2);
            let s2: f64 = eigh(&a).unwrap().values.iter().map(|v| v * v).sum();
            prop_assert!((f2 - s2).abs() <= 1e-8 * f2.max(1e-300));
        }

        #[test]
        fn cholesky_recovers_factor(p in 1usize..10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut l = standard_normal_matrix(p, p, &mut rng);
            for i in 0..p {
                for j in (i + 1)..p {
                    l[[i, j]] = 0.0;
                }
                l[[i, i]] = l[[i, i]].abs() + 0.5;
            }
            let a = SymMatrix::symmetrized(l.dot(&l.t()));
            let got = cholesky(&a).unwrap();
            let err = frobenius((&got.into_lower() - &l).view());
            prop_assert!(err <= 1e-8 * frobenius(l.view()).max(1.0));
        }
    }
}
