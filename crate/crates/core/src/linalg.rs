//! Symmetric eigen-solvers for graph Laplacians.
//!
//! Small operators go through a dense solver. Large ones use Lanczos with
//! full reorthogonalisation, one eigenpair at a time, deflating converged
//! vectors so repeated eigenvalues are found with their multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("eigenpair {index} did not converge: residual {residual:e} > {tolerance:e}")]
    NotConverged {
        index: usize,
        residual: f64,
        tolerance: f64,
    },
}

/// Sparse symmetric operator `diag(d) + offdiag`.
#[derive(Debug, Clone)]
pub struct SparseSym {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    /// `rows[i]` lists the off-diagonal entries of row `i`; the caller keeps them symmetric.
    pub fn new(diag: Vec<f64>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(diag.len(), rows.len());
        SparseSym { diag, rows }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for &(j, v) in &self.rows[i] {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Euclidean norm of `A x - lambda x`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y.iter()
            .zip(x)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// All eigenvalues in ascending order.
pub fn dense_eigenvalues(op: &SparseSym) -> Vec<f64> {
    if op.dim() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            krylov_dim: 80,
            max_restarts: 300,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Subtract projections onto every vector in `basis` (twice, for stability).
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// The `count` smallest eigenpairs, ascending, each with residual below the tolerance.
pub fn lanczos_smallest(
    op: &SparseSym,
    count: usize,
    opts: LanczosOptions,
) -> Result<Vec<(f64, Vec<f64>)>, SolverError> {
    let n = op.dim();
    let count = count.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut pairs = Vec::with_capacity(count);

    for index in 0..count {
        let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut best = (f64::INFINITY, f64::INFINITY, Vec::new());
        let mut converged = false;
        for _ in 0..opts.max_restarts {
            orthogonalize(&mut start, &locked);
            if normalize(&mut start) == 0.0 {
                start = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                continue;
            }
            let (theta, x) = lanczos_pass(op, &start, &locked, opts.krylov_dim);
            let residual = op.residual(theta, &x);
            if residual < best.1 {
                best = (theta, residual, x.clone());
            }
            if residual <= opts.tolerance {
                converged = true;
                break;
            }
            start = x;
        }
        if !converged {
            return Err(SolverError::NotConverged {
                index,
                residual: best.1,
                tolerance: opts.tolerance,
            });
        }
        let (theta, _, x) = best;
        locked.push(x.clone());
        pairs.push((theta, x));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// One Lanczos run from `start`; returns the smallest Ritz pair.
///
/// The Ritz problem is solved on the full projection `Q^T A Q`, so the result
/// stays correct when the Krylov space is exhausted early.
fn lanczos_pass(op: &SparseSym, start: &[f64], locked: &[Vec<f64>], m: usize) -> (f64, Vec<f64>) {
    let n = op.dim();
    let m = m.min(n - locked.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut w = vec![0.0; n];
        op.apply(&basis[j], &mut w);
        let image_norm = dot(&w, &w).sqrt();
        images.push(w.clone());
        if j + 1 == m {
            break;
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        // an (almost) invariant subspace: its Ritz pairs are already exact
        if normalize(&mut w) <= 1e-8 * image_norm {
            break;
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        normalize(&mut w);
        basis.push(w);
    }
    let k = basis.len();
    let mut h = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty projection");
    let y = eig.eigenvectors.column(imin);
    let mut x = vec![0.0; n];
    for (c, q) in y.iter().zip(&basis) {
        x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
    }
    orthogonalize(&mut x, locked);
    normalize(&mut x);
    let mut ax = vec![0.0; n];
    op.apply(&x, &mut ax);
    (dot(&x, &ax), x)
}
