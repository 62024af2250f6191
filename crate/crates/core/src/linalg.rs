//! Matrix-free Krylov tools: restarted GMRES for the Newton systems and a Lanczos
//! eigenvalue routine for symmetric positive semidefinite operators.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Relative residual target `‖b - Ax‖ ≤ tol ‖b‖`.
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            restart: 60,
            max_iterations: 600,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
pub fn gmres<A>(mut apply: A, b: &[f64], opts: GmresOptions) -> GmresOutcome
where
    A: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = opts.restart.max(1).min(n.max(1));
    let mut total = 0usize;
    let mut scratch = vec![0.0; n];
    let mut rel: f64;

    while total < opts.max_iterations {
        // r = b - A x
        apply(&x, &mut scratch);
        let r: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= opts.tolerance {
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            let mut w = vec![0.0; n];
            apply(&basis[k], &mut w);
            total += 1;
            for (i, v) in basis.iter().enumerate() {
                let h = dot(&w, v);
                hess[i][k] = h;
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj -= h * vj;
                }
            }
            let h_next = norm(&w);
            hess[k + 1][k] = h_next;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hess[k][k] / denom;
                sn[k] = hess[k + 1][k] / denom;
            }
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            rel = g[k + 1].abs() / b_norm;
            if rel <= opts.tolerance || h_next == 0.0 || total >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = if hess[i][i] != 0.0 { s / hess[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        if rel <= opts.tolerance {
            break;
        }
    }

    // true residual
    apply(&x, &mut scratch);
    let true_rel = norm(&b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / b_norm;
    GmresOutcome {
        solution: x,
        iterations: total,
        relative_residual: true_rel,
        converged: true_rel <= opts.tolerance * 10.0,
    }
}

/// Ritz values of a symmetric operator from a fully reorthogonalized Lanczos run.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Ascending Ritz values.
    pub ritz_values: Vec<f64>,
    /// Residual bound `|β_k s_{k,i}|` for each Ritz value.
    pub residual_bounds: Vec<f64>,
    pub steps: usize,
}

/// Lanczos with full reorthogonalization, started from a seeded random vector.
/// Stops early once the `watch` extreme Ritz values (smallest if `watch_smallest`,
/// otherwise largest) have residual bounds below `tolerance` times the spectral scale.
pub fn lanczos<A>(
    mut apply: A,
    n: usize,
    max_steps: usize,
    watch: usize,
    watch_smallest: bool,
    tolerance: f64,
    seed: u64,
) -> LanczosResult
where
    A: FnMut(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let qn = norm(&q);
    q.iter_mut().for_each(|v| *v /= qn);

    let max_steps = max_steps.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last = LanczosResult {
        ritz_values: vec![],
        residual_bounds: vec![],
        steps: 0,
    };

    for k in 0..max_steps {
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alphas.push(a);
        // full reorthogonalization (twice is enough)
        for _ in 0..2 {
            for v in &basis {
                let h = dot(&w, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
        }
        let b = norm(&w);

        let check = (k + 1) % 5 == 0 || k + 1 == max_steps || b < 1e-14;
        if check {
            last = tridiagonal_ritz(&alphas, &betas, b, k + 1);
            let scale = last
                .ritz_values
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            let count = watch.min(last.ritz_values.len());
            let idx: Vec<usize> = if watch_smallest {
                (0..count).collect()
            } else {
                (last.ritz_values.len() - count..last.ritz_values.len()).collect()
            };
            let done = count == watch && idx.iter().all(|&i| last.residual_bounds[i] <= tolerance * scale);
            if done || b < 1e-14 {
                break;
            }
        }
        betas.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
    last
}

fn tridiagonal_ritz(alphas: &[f64], betas: &[f64], next_beta: f64, k: usize) -> LanczosResult {
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| (eig.eigenvalues[i], (next_beta * eig.eigenvectors[(k - 1, i)]).abs()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    LanczosResult {
        ritz_values: pairs.iter().map(|p| p.0).collect(),
        residual_bounds: pairs.iter().map(|p| p.1).collect(),
        steps: k,
    }
}
