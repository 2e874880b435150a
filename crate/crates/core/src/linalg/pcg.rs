use super::sparse::SparseMatrix;
use super::{dot, norm2};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradients for an SPD system.
///
/// Stops once `‖b − a x‖₂ / ‖b‖₂ ≤ tol` or after `max_iter` iterations; the
/// outcome reports which.
pub fn pcg_solve(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<PcgOutcome> {
    let n = a.n_rows();
    check_len(n, a.n_cols())?;
    check_len(n, b.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("pcg tolerance {tol} must be positive")));
    }

    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(PcgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;

    for it in 1..=max_iter {
        a.spmv_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::Diverged(format!("pᵀAp = {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / b_norm;
        if !rel.is_finite() {
            return Err(Error::Diverged(format!("residual is {rel} at iteration {it}")));
        }
        if rel <= tol {
            return Ok(PcgOutcome {
                x,
                iterations: it,
                relative_residual: rel,
                converged: true,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Ok(PcgOutcome {
        x,
        iterations: max_iter,
        relative_residual: rel,
        converged: false,
    })
}
