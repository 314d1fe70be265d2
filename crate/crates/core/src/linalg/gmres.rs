use super::DenseMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_GMRES_CAP: usize = 400;

/// Arnoldi vectors shorter than this fraction of `‖A v_k‖` count as a
/// breakdown (the Krylov space has become invariant).
const BREAKDOWN_RTOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct GmresTrace {
    pub solution: Vec<f64>,
    /// `‖r_k‖₂ / ‖b‖₂` after each iteration, from the Givens recurrence.
    pub residuals: Vec<f64>,
    /// `‖b − A x_k‖₂ / ‖b‖₂` recomputed from each iterate. It levels off at
    /// roundoff while the recurrence keeps shrinking.
    pub true_residuals: Vec<f64>,
    /// Last entry of `true_residuals`.
    pub final_residual: f64,
    pub converged: bool,
    pub breakdown: bool,
    pub iterations: usize,
}

impl GmresTrace {
    /// First iteration (1-based) whose residual is at most `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        self.residuals.iter().position(|&r| r <= tol).map(|k| k + 1)
    }
}

/// Full GMRES from a zero initial guess, with modified Gram–Schmidt
/// Arnoldi and Givens rotations. Stops when the relative residual reaches
/// `tol`, the Krylov space breaks down, or after `max_iter` iterations.
pub fn gmres(a: &DenseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<GmresTrace> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let m = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(b.iter().map(|v| v / bnorm).collect());
    // column k of the Hessenberg matrix, already rotated
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs: Vec<f64> = Vec::with_capacity(m);
    let mut sn: Vec<f64> = Vec::with_capacity(m);
    let mut g = vec![bnorm];
    let mut residuals = Vec::with_capacity(m);
    let mut true_residuals = Vec::with_capacity(m);
    let mut x = vec![0.0; n];
    let mut converged = false;
    let mut breakdown = false;

    for k in 0..m {
        let mut w = a.matvec(&basis[k]);
        let wnorm = norm2(&w);
        let mut col = vec![0.0; k + 2];
        for (j, v) in basis.iter().enumerate() {
            let hj = dot(&w, v);
            col[j] = hj;
            w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hj * vi);
        }
        let hnext = norm2(&w);
        col[k + 1] = hnext;
        for j in 0..k {
            let t = cs[j] * col[j] + sn[j] * col[j + 1];
            col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
            col[j] = t;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        cs.push(c);
        sn.push(s);
        col[k] = r;
        col.truncate(k + 1);
        h.push(col);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        let rel = g[k + 1].abs() / bnorm;
        residuals.push(rel);
        x = iterate(&h, &g, &basis, n);
        true_residuals.push(residual_norm(a, &x, b) / bnorm);
        if rel <= tol {
            converged = true;
            break;
        }
        if hnext <= BREAKDOWN_RTOL * wnorm {
            breakdown = true;
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }

    Ok(GmresTrace {
        solution: x,
        final_residual: *true_residuals.last().unwrap_or(&1.0),
        iterations: residuals.len(),
        residuals,
        true_residuals,
        converged,
        breakdown,
    })
}

/// `x_k = V y` with `y` minimizing the projected residual.
fn iterate(h: &[Vec<f64>], g: &[f64], basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let k = h.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| h[j][i] * y[j]).sum();
        y[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
    }
    let mut x = vec![0.0; n];
    for (yj, v) in y.iter().zip(basis) {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yj * vi);
    }
    x
}

fn residual_norm(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    norm2(&ax.iter().zip(b).map(|(p, q)| q - p).collect::<Vec<_>>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
