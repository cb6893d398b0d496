//! Reference solvers written against plain `Vec<Vec<f64>>`, sharing no code
//! with the library: a cyclic Jacobi eigensolver and two first-order methods
//! for the penalized, eigenvalue-constrained least-squares problem.

#![allow(dead_code, clippy::needless_range_loop)]

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(p: usize) -> Mat {
    vec![vec![0.0; p]; p]
}

pub fn add(a: &Mat, b: &Mat, wa: f64, wb: f64) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| wa * x + wb * y).collect())
        .collect()
}

pub fn frob(a: &Mat) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
/// Returns eigenvalues and eigenvectors as columns of `v`.
pub fn jacobi(a: &Mat) -> (Vec<f64>, Mat) {
    let p = a.len();
    let mut m = a.clone();
    let mut v = zeros(p);
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = m.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                if m[i][j].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[j][j] - m[i][i]) / (2.0 * m[i][j]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (mki, mkj) = (m[k][i], m[k][j]);
                    m[k][i] = c * mki - s * mkj;
                    m[k][j] = s * mki + c * mkj;
                }
                for k in 0..p {
                    let (mik, mjk) = (m[i][k], m[j][k]);
                    m[i][k] = c * mik - s * mjk;
                    m[j][k] = s * mik + c * mjk;
                }
                for row in v.iter_mut() {
                    let (vi, vj) = (row[i], row[j]);
                    row[i] = c * vi - s * vj;
                    row[j] = s * vi + c * vj;
                }
            }
        }
    }
    ((0..p).map(|i| m[i][i]).collect(), v)
}

/// Nearest matrix with every eigenvalue at least `eps`.
pub fn clamp_eigen(a: &Mat, eps: f64) -> Mat {
    let p = a.len();
    let (w, v) = jacobi(a);
    let mut out = zeros(p);
    for k in 0..p {
        let l = w[k].max(eps);
        for i in 0..p {
            for j in 0..p {
                out[i][j] += l * v[i][k] * v[j][k];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            let s = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

pub fn min_eigen(a: &Mat) -> f64 {
    jacobi(a).0.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn objective(sigma: &Mat, s_l: &Mat, s_u: &Mat, lambda: f64) -> f64 {
    let p = sigma.len();
    let mut f = 0.0;
    for i in 0..p {
        for j in 0..p {
            f += 0.5 * (sigma[i][j] - s_l[i][j]).powi(2) + 0.5 * (sigma[i][j] - s_u[i][j]).powi(2);
            if i != j {
                f += lambda * sigma[i][j].abs();
            }
        }
    }
    f
}

/// Projected gradient ascent on the dual of the problem.
///
/// With `A = (S^l + S^u)/2`, the objective equals `‖Σ − A‖²_F + λ‖Σ‖₁,off`
/// up to a constant, and `λ‖Σ‖₁,off = max_{|Z_ij| ≤ λ, Z_ii = 0} ⟨Z, Σ⟩`.
/// For fixed `Z` the constrained minimizer is `proj(A − Z/2)`; the dual is
/// concave with Lipschitz-1/2 gradient `offdiag(Σ(Z))`, so step 2 is safe.
pub fn dual_solve(s_l: &Mat, s_u: &Mat, lambda: f64, eps: f64, iters: usize) -> Mat {
    let p = s_l.len();
    let a = add(s_l, s_u, 0.5, 0.5);
    let mut z = zeros(p);
    let primal = |z: &Mat| clamp_eigen(&add(&a, z, 1.0, -0.5), eps);
    let mut sigma = primal(&z);
    for _ in 0..iters {
        let mut moved = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    let nz = (z[i][j] + 2.0 * sigma[i][j]).clamp(-lambda, lambda);
                    moved = moved.max((nz - z[i][j]).abs());
                    z[i][j] = nz;
                }
            }
        }
        sigma = primal(&z);
        if moved < 1e-15 {
            break;
        }
    }
    sigma
}

/// Projected subgradient descent on the primal with step `1/(2(k+1))`,
/// returning the best iterate seen.
pub fn subgradient_solve(s_l: &Mat, s_u: &Mat, lambda: f64, eps: f64, iters: usize) -> Mat {
    let p = s_l.len();
    let mut x = clamp_eigen(&add(s_l, s_u, 0.5, 0.5), eps);
    let mut best = x.clone();
    let mut best_f = objective(&x, s_l, s_u, lambda);
    for k in 0..iters {
        let step = 1.0 / (2.0 * (k as f64 + 1.0));
        let mut g = zeros(p);
        for i in 0..p {
            for j in 0..p {
                g[i][j] = 2.0 * x[i][j] - s_l[i][j] - s_u[i][j];
                if i != j && x[i][j] != 0.0 {
                    g[i][j] += lambda * x[i][j].signum();
                }
            }
        }
        x = clamp_eigen(&add(&x, &g, 1.0, -step), eps);
        let f = objective(&x, s_l, s_u, lambda);
        if f < best_f {
            best_f = f;
            best = x.clone();
        }
    }
    best
}

/// `B Bᵀ / k` for a `p × k` matrix `B` of standard normals (xorshift and
/// Box-Muller), so `k < p` gives a singular matrix.
pub fn random_psd(p: usize, k: usize, seed: u64) -> Mat {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut uniform = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    let mut b = vec![vec![0.0; k]; p];
    for row in b.iter_mut() {
        for x in row.iter_mut() {
            *x = (-2.0 * uniform().ln()).sqrt() * (std::f64::consts::TAU * uniform()).cos();
        }
    }
    let mut out = zeros(p);
    for i in 0..p {
        for j in 0..p {
            out[i][j] = (0..k).map(|t| b[i][t] * b[j][t]).sum::<f64>() / k as f64;
        }
    }
    out
}
