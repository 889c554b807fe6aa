//! Compressed sparse rows and restarted GMRES with Jacobi right
//! preconditioning.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from per-row `(column, value)` lists.
    pub fn from_rows<I, R>(n: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[(u32, f64)]>,
    {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for &(c, v) in row.as_ref() {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), n + 1, "row count mismatch");
        CsrMatrix { n, row_ptr, cols, vals }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).filter(|&(c, _)| c == i).map(|(_, v)| v).sum()).collect()
    }

    /// `out = A x`.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        crate::par::fill(out, |i| {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (&c, &v) in self.cols[r.clone()].iter().zip(&self.vals[r]) {
                acc += v * x[c as usize];
            }
            acc
        });
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        self.mul_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresReport {
    /// Krylov iterations over all restart cycles.
    pub iterations: usize,
    pub restarts: usize,
    /// Final true residual, sup-norm.
    pub residual: f64,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` in place from the initial guess in `x`, until the true
/// residual satisfies `|b - A x|_inf <= tol * |b|_inf`.
///
/// Fails with [`Error::LinearSolveStagnation`] when the restart budget runs
/// out or two consecutive restart cycles make no progress.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> Result<GmresReport> {
    let n = a.dim();
    assert!(b.len() == n && x.len() == n);
    let target = tol * sup_norm(b);
    let inv_diag: Vec<f64> =
        a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();

    let m = restart.max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut iterations = 0;
    let mut stalled = 0;

    let mut r = a.residual(x, b);
    let mut res = sup_norm(&r);
    for restarts in 0..=max_restarts {
        if res <= target {
            return Ok(GmresReport { iterations, restarts, residual: res });
        }
        if restarts == max_restarts {
            break;
        }
        let beta = sqrt(dot(&r, &r));
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;

        let mut k_used = 0;
        for k in 0..m {
            for (zi, (vi, di)) in z.iter_mut().zip(basis[k].iter().zip(&inv_diag)) {
                *zi = vi * di;
            }
            let mut w = vec![0.0; n];
            a.mul_into(&z, &mut w);
            // Modified Gram-Schmidt.
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][k] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * vi;
                }
            }
            let norm = sqrt(dot(&w, &w));
            h[k + 1][k] = norm;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = libm::hypot(h[k][k], h[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            // The 2-norm bounds the sup-norm, so this exit is conservative.
            if g[k + 1].abs() <= 0.5 * target || norm == 0.0 {
                break;
            }
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }

        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for (yi, v) in y.iter().zip(&basis) {
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += yi * vi;
            }
        }
        for ((xi, zi), di) in x.iter_mut().zip(&z).zip(&inv_diag) {
            *xi += zi * di;
        }

        r = a.residual(x, b);
        let new_res = sup_norm(&r);
        if !(new_res < 0.9 * res) {
            stalled += 1;
            if stalled >= 2 {
                res = new_res.min(res);
                break;
            }
        } else {
            stalled = 0;
        }
        res = new_res;
    }
    if res <= target {
        return Ok(GmresReport { iterations, restarts: max_restarts, residual: res });
    }
    Err(Error::LinearSolveStagnation { iterations, residual: res, target })
}
