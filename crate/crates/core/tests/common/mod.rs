#![allow(dead_code)]

use std::path::PathBuf;

use heatsrc::linalg::{dot, norm2};
use heatsrc::measure::GaussianStream;
use heatsrc::{CholeskyFactor, SparseMatrix};

pub fn random_vec(n: usize, stream: &mut GaussianStream) -> Vec<f64> {
    (0..n).map(|_| stream.next_standard()).collect()
}

pub fn letter(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/letters")
        .join(format!("{name}.pgm"))
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b)
}

fn normalize(v: &mut [f64]) {
    let s = norm2(v);
    v.iter_mut().for_each(|x| *x /= s);
}

/// Largest eigenvalue by power iteration.
pub fn lambda_max(a: &SparseMatrix, iters: usize) -> f64 {
    let mut stream = GaussianStream::new(7);
    let mut v = random_vec(a.n_rows(), &mut stream);
    normalize(&mut v);
    let mut lam = 0.0;
    for _ in 0..iters {
        let mut w = a.spmv(&v).unwrap();
        lam = dot(&v, &w);
        normalize(&mut w);
        v = w;
    }
    lam
}

/// Smallest eigenvalue by inverse iteration.
pub fn lambda_min(a: &SparseMatrix, iters: usize) -> f64 {
    let factor = CholeskyFactor::factor(a).unwrap();
    let mut stream = GaussianStream::new(11);
    let mut v = random_vec(a.n_rows(), &mut stream);
    normalize(&mut v);
    let mut lam = 0.0;
    for _ in 0..iters {
        let mut w = factor.solve(&v).unwrap();
        lam = 1.0 / dot(&v, &w);
        normalize(&mut w);
        v = w;
    }
    lam
}
