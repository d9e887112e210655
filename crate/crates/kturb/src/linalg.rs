//! Small dense/iterative linear solvers shared by the steppers: the Thomas
//! algorithm for tridiagonal M-matrices (exact to round-off) and a
//! matrix-free conjugate-gradient solver for the SPD systems of the 2D mode.

use crate::error::{Error, Result};

/// Solve a tridiagonal system in place of fresh buffers.
///
/// `sub[i]` couples row i to i-1 (sub[0] unused), `sup[i]` couples row i to
/// i+1 (sup[n-1] unused). The implicit diffusion matrices here are strictly
/// diagonally dominant M-matrices, so no pivoting is needed.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(Error::LinearSolve("tridiagonal zero pivot at row 0".into()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv == 0.0 {
            return Err(Error::LinearSolve(format!(
                "tridiagonal zero pivot at row {i}"
            )));
        }
        c[i] = sup[i] / piv;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Matrix-free conjugate gradients for an SPD operator on flat vectors.
/// Converges when ||r|| <= tol * ||rhs||; errors on breakdown or stall.
pub fn cg(
    apply: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * rhs_norm {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::LinearSolve(format!(
                "CG breakdown: p'Ap = {pap} (operator not positive definite)"
            )));
        }
        let alpha = rr / pap;
        for ((xi, pi), (ri, api)) in x.iter_mut().zip(&p).zip(r.iter_mut().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::LinearSolve(format!(
        "CG did not converge to {tol:.1e} in {max_iter} iterations (residual {:.3e})",
        rr.sqrt() / rhs_norm
    )))
}
