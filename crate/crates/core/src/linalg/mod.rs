//! Sparse and small-dense linear algebra kernels.

mod cholesky;
mod dense;
mod pcg;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, CholeskyFactor};
pub use dense::{sym_eig_small, DenseCholesky, DenseSymMatrix, SymEigen};
pub use pcg::{pcg_solve, PcgOutcome};
pub use sparse::SparseMatrix;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
