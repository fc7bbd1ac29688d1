//! Independent SVD oracle.
//!
//! One-sided (Hestenes) Jacobi on the columns of a working copy of `A`. It
//! shares nothing with the refinement code beyond the `Matrix` container, so
//! it can be used to check refinement output.

pub(crate) mod preconditions;

pub use preconditions::{
    check_preconditions, PreconditionReport, Verdict, LEADING_GAP_ULPS, SIMPLICITY_GAP_REL,
    VNN_ZERO_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::matrix::{dot, two_norm_vector, Matrix};

/// Sweeps stop once every column pair satisfies
/// `|w_p . w_q| <= ORTHOGONALITY_TOL * |w_p| |w_q|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-15;
pub const MAX_SWEEPS: usize = 60;

/// `A = U diag(sigma) V^T` with `sigma` sorted descending.
///
/// Sign convention: the largest-magnitude entry of every column of `V` is
/// positive (first such entry on ties), and `U` follows from `A v = sigma u`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
    /// Jacobi sweeps used.
    pub sweeps: usize,
}

impl SvdResult {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma_min(&self) -> f64 {
        *self.sigma.last().expect("non-empty")
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// `v_nn`: last entry of the right singular vector belonging to `sigma_n`.
    pub fn v_nn(&self) -> f64 {
        let n = self.n();
        self.v[(n - 1, n - 1)]
    }

    /// `u_nn`: last entry of the left singular vector belonging to `sigma_n`.
    pub fn u_nn(&self) -> f64 {
        let n = self.n();
        self.u[(n - 1, n - 1)]
    }

    pub fn reconstruct(&self) -> Matrix {
        let n = self.n();
        let mut us = self.u.clone();
        for i in 0..n {
            for j in 0..n {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul(&self.v.transpose()).expect("square factors")
    }
}

/// Computes the SVD of a square matrix.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    // Columns are stored as rows of the transposes so every column operation
    // is a contiguous slice operation.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= ORTHOGONALITY_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|col| two_norm_vector(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in column order, so output is deterministic.
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let mut ucols: Vec<Option<Vec<f64>>> = order
        .iter()
        .map(|&k| {
            let s = norms[k];
            (s > 0.0).then(|| w[k].iter().map(|x| x / s).collect())
        })
        .collect();
    let mut vcols: Vec<Vec<f64>> = order.iter().map(|&k| v[k].clone()).collect();

    reorthogonalize(&mut ucols);
    complete_basis(&mut ucols);
    let mut ucols: Vec<Vec<f64>> = ucols.into_iter().map(|c| c.expect("completed")).collect();

    for (uc, vc) in ucols.iter_mut().zip(vcols.iter_mut()) {
        let mut lead = 0;
        for (k, x) in vc.iter().enumerate() {
            if x.abs() > vc[lead].abs() {
                lead = k;
            }
        }
        if vc[lead] < 0.0 {
            vc.iter_mut().for_each(|x| *x = -*x);
            uc.iter_mut().for_each(|x| *x = -*x);
        }
    }

    Ok(SvdResult {
        u: from_columns(&ucols),
        sigma,
        v: from_columns(&vcols),
        sweeps,
    })
}

/// Smallest singular value of a square matrix.
pub fn sigma_min(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.sigma_min())
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Gram-Schmidt over the `U` columns in descending `sigma` order. Columns of
/// tiny singular values are `w / |w|` for a `w` made mostly of rounding error;
/// any that lose more than half their norm are dropped and later completed.
/// Changing `u_k` by `d` moves `U S V^T` by `sigma_k d`, which stays at the
/// rounding level of `A`.
fn reorthogonalize(cols: &mut [Option<Vec<f64>>]) {
    for k in 0..cols.len() {
        let Some(mut c) = cols[k].take() else {
            continue;
        };
        for _ in 0..2 {
            for other in cols[..k].iter().flatten() {
                let d = dot(&c, other);
                c.iter_mut().zip(other).for_each(|(x, o)| *x -= d * o);
            }
        }
        let norm = two_norm_vector(&c);
        if norm > 0.5 {
            c.iter_mut().for_each(|x| *x /= norm);
            cols[k] = Some(c);
        }
    }
}

/// Fills the columns belonging to zero singular values with unit vectors
/// orthogonal to everything else, by Gram-Schmidt over the standard basis.
fn complete_basis(cols: &mut [Option<Vec<f64>>]) {
    let n = cols.len();
    let mut candidate = 0;
    for k in 0..n {
        if cols[k].is_some() {
            continue;
        }
        while candidate < n {
            let mut e = vec![0.0; n];
            e[candidate] = 1.0;
            candidate += 1;
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for other in cols.iter().flatten() {
                    let d = dot(&e, other);
                    e.iter_mut().zip(other).for_each(|(x, o)| *x -= d * o);
                }
            }
            let norm = two_norm_vector(&e);
            if norm > 0.5 {
                e.iter_mut().for_each(|x| *x /= norm);
                cols[k] = Some(e);
                break;
            }
        }
    }
}

fn from_columns(cols: &[Vec<f64>]) -> Matrix {
    let n = cols.len();
    let mut m = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    m
}
