mod common;

use common::{random_vec, rel_diff};
use heatsrc::linalg::{norm2, pcg_solve, sym_eig_small};
use heatsrc::measure::GaussianStream;
use heatsrc::{assemble, build_mesh, CholeskyFactor, DenseSymMatrix, SparseMatrix};

fn laplacian_2d(k: usize) -> SparseMatrix {
    let idx = |i: usize, j: usize| j * k + i;
    let mut t = Vec::new();
    for j in 0..k {
        for i in 0..k {
            t.push((idx(i, j), idx(i, j), 4.0));
            if i > 0 {
                t.push((idx(i, j), idx(i - 1, j), -1.0));
            }
            if i + 1 < k {
                t.push((idx(i, j), idx(i + 1, j), -1.0));
            }
            if j > 0 {
                t.push((idx(i, j), idx(i, j - 1), -1.0));
            }
            if j + 1 < k {
                t.push((idx(i, j), idx(i, j + 1), -1.0));
            }
        }
    }
    SparseMatrix::from_triplets(k * k, k * k, &t).unwrap()
}

#[test]
fn pcg_matches_cholesky_on_laplacian() {
    let a = laplacian_2d(15);
    let mut s = GaussianStream::new(3);
    let b = random_vec(a.n_rows(), &mut s);
    let direct = CholeskyFactor::factor(&a).unwrap().solve(&b).unwrap();
    let out = pcg_solve(&a, &b, 1e-10, 1000).unwrap();
    assert!(out.converged);
    assert!(rel_diff(&out.x, &direct) < 1e-8);
}

#[test]
fn stiffness_solve_residual_on_small_grid() {
    let sys = assemble(&build_mesh(1.0, 1.0, 0.2).unwrap()).unwrap();
    assert_eq!(sys.n_dofs(), 16);
    let a = sys.stiffness();
    let mut s = GaussianStream::new(5);
    let b = random_vec(16, &mut s);
    let x = sys.stiffness_factor().solve(&b).unwrap();
    let ax = a.spmv(&x).unwrap();
    assert!(rel_diff(&ax, &b) <= 1e-12);
}

#[test]
fn cholesky_round_trip_and_reconstruction() {
    let sys = assemble(&build_mesh(1.0, 1.0, 1.0 / 16.0).unwrap()).unwrap();
    let mut s = GaussianStream::new(9);
    for a in [sys.stiffness(), sys.mass()] {
        let f = CholeskyFactor::factor(a).unwrap();
        for _ in 0..5 {
            let x0 = random_vec(a.n_rows(), &mut s);
            let x = f.solve(&a.spmv(&x0).unwrap()).unwrap();
            assert!(rel_diff(&x, &x0) <= 1e-10);
        }
        let permuted = a.permute_symmetric(f.permutation()).to_dense();
        let llt = f.reconstruct_permuted();
        let mut err = 0.0;
        for (r1, r2) in permuted.iter().zip(&llt) {
            for (x, y) in r1.iter().zip(r2) {
                err += (x - y) * (x - y);
            }
        }
        assert!(err.sqrt() / a.frobenius_norm() <= 1e-12);
    }
}

#[test]
fn pcg_and_cholesky_agree_within_ten_tol() {
    let sys = assemble(&build_mesh(1.0, 1.0, 1.0 / 16.0).unwrap()).unwrap();
    let mut s = GaussianStream::new(13);
    let b = random_vec(sys.n_dofs(), &mut s);
    let tol = 1e-9;
    let direct = sys.stiffness_factor().solve(&b).unwrap();
    let out = pcg_solve(sys.stiffness(), &b, tol, 2000).unwrap();
    let r: Vec<f64> = sys
        .stiffness()
        .spmv(&out.x)
        .unwrap()
        .iter()
        .zip(&b)
        .map(|(x, y)| y - x)
        .collect();
    assert!(norm2(&r) / norm2(&b) <= tol);
    let r2: Vec<f64> = sys
        .stiffness()
        .spmv(&direct)
        .unwrap()
        .iter()
        .zip(&b)
        .map(|(x, y)| y - x)
        .collect();
    assert!((norm2(&r) - norm2(&r2)).abs() / norm2(&b) <= 10.0 * tol);
}

#[test]
fn eigen_reconstruction_of_random_symmetric() {
    let mut s = GaussianStream::new(17);
    for dim in [1, 2, 5, 10] {
        let raw = random_vec(dim * dim, &mut s);
        let k = DenseSymMatrix::from_fn(dim, |i, j| raw[i * dim + j] + raw[j * dim + i]);
        let e = sym_eig_small(&k).unwrap();
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let norm = k.frobenius_norm();
        let mut err = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let rec: f64 = (0..dim)
                    .map(|c| e.eigenvalues[c] * e.eigenvectors[c][i] * e.eigenvectors[c][j])
                    .sum();
                err += (rec - k.get(i, j)).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-11 * norm, "dim {dim}");
        for a in 0..dim {
            for b in 0..dim {
                let d: f64 = (0..dim).map(|i| e.eigenvectors[a][i] * e.eigenvectors[b][i]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() <= 1e-12);
            }
        }
    }
}
