//! Envelope (profile) Cholesky factorization under a reverse Cuthill–McKee
//! ordering.
//!
//! Fill-in of a Cholesky factor never leaves the envelope of the lower
//! triangle, so each row of `L` is stored as one contiguous run of columns
//! `first[i]..=i`. On structured grids RCM keeps the envelope width close to
//! the grid width.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::sparse::SparseMatrix;
use crate::error::{check_len, Error, Result};

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    while order.len() < n {
        // lowest-degree unvisited node seeds the next component
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let start = pseudo_peripheral(seed, &adjacency, &degree, &visited);

        visited[start] = true;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            order.push(node);
            let mut next: Vec<usize> = adjacency[node]
                .iter()
                .copied()
                .filter(|&j| !visited[j])
                .collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }

    order.reverse();
    order
}

/// Repeated BFS from the deepest level's minimum-degree node until the
/// eccentricity stops growing.
fn pseudo_peripheral(
    seed: usize,
    adjacency: &[Vec<usize>],
    degree: &[usize],
    blocked: &[bool],
) -> usize {
    let mut current = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let (ecc, last_level) = bfs_levels(current, adjacency, blocked);
        if ecc <= depth && depth > 0 {
            break;
        }
        depth = ecc;
        let candidate = last_level
            .into_iter()
            .min_by_key(|&j| (degree[j], j))
            .unwrap_or(current);
        if candidate == current {
            break;
        }
        current = candidate;
    }
    current
}

fn bfs_levels(start: usize, adjacency: &[Vec<usize>], blocked: &[bool]) -> (usize, Vec<usize>) {
    let mut seen = blocked.to_vec();
    seen[start] = true;
    let mut level = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &node in &level {
            for &j in &adjacency[node] {
                if !seen[j] {
                    seen[j] = true;
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            return (depth, level);
        }
        depth += 1;
        level = next;
    }
}

/// `P A Pᵀ = L Lᵀ` with `L` stored row-wise over its envelope.
#[derive(Debug)]
pub struct CholeskyFactor {
    permutation: Vec<usize>,
    lower: SparseMatrix,
    solves: AtomicUsize,
}

impl CholeskyFactor {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_ordering(a, perm)
    }

    /// Factors with a caller-supplied ordering (`perm[new] = old`), e.g. one
    /// shared between matrices with the same sparsity pattern.
    pub fn factor_with_ordering(a: &SparseMatrix, permutation: Vec<usize>) -> Result<Self> {
        let n = a.n_rows();
        check_len(n, a.n_cols())?;
        check_len(n, permutation.len())?;
        let (i, j, diff) = a.symmetry_defect();
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if diff > 1e-13 * scale {
            return Err(Error::NotSymmetric { i, j, diff });
        }

        let pa = a.permute_symmetric(&permutation);

        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = pa.row(i).map(|(c, _)| c).next().unwrap_or(i).min(i);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut l = vec![0.0f64; offsets[n]];
        for i in 0..n {
            for (c, v) in pa.row(i) {
                if c <= i {
                    l[offsets[i] + c - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_start = offsets[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (head, tail) = l.split_at_mut(row_start);
                let row_j = &head[offsets[j]..offsets[j + 1]];
                let row_i = &mut tail[..i - fi + 1];
                let dot: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(&row_j[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                let diag_j = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - dot) / diag_j;
            }
            let row_i = &mut l[row_start..offsets[i + 1]];
            let (off, diag) = row_i.split_at_mut(i - fi);
            let pivot = diag[0] - off.iter().map(|x| x * x).sum::<f64>();
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { row: i, pivot });
            }
            diag[0] = pivot.sqrt();
        }

        let col_indices = (0..n).flat_map(|i| first[i]..=i).collect();
        let lower = SparseMatrix::from_raw_parts(n, n, offsets, col_indices, l);
        Ok(Self {
            permutation,
            lower,
            solves: AtomicUsize::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    /// `perm[new] = old`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn lower_factor(&self) -> &SparseMatrix {
        &self.lower
    }

    /// Number of solves performed with this factor so far.
    pub fn solve_count(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), b.len())?;
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        Ok(x)
    }

    /// Solves into `x`; lengths must already match.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);
        self.solves.fetch_add(1, Ordering::Relaxed);

        let offsets = self.lower.row_offsets();
        let cols = self.lower.col_indices();
        let vals = self.lower.values();

        let mut y: Vec<f64> = self.permutation.iter().map(|&old| b[old]).collect();
        // L y = P b
        for i in 0..n {
            let (s, e) = (offsets[i], offsets[i + 1]);
            let fi = cols[s];
            let dot: f64 = vals[s..e - 1]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - dot) / vals[e - 1];
        }
        // Lᵀ z = y, column sweep over the rows of L
        for i in (0..n).rev() {
            let (s, e) = (offsets[i], offsets[i + 1]);
            let fi = cols[s];
            let zi = y[i] / vals[e - 1];
            y[i] = zi;
            for (yk, l) in y[fi..i].iter_mut().zip(&vals[s..e - 1]) {
                *yk -= l * zi;
            }
        }
        for (new, &old) in self.permutation.iter().enumerate() {
            x[old] = y[new];
        }
    }

    /// Dense `L Lᵀ` in the permuted ordering; test helper for small systems.
    pub fn reconstruct_permuted(&self) -> Vec<Vec<f64>> {
        let l = self.lower.to_dense();
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = (0..n).map(|k| l[i][k] * l[j][k]).sum();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_2d(m: usize) -> SparseMatrix {
        let idx = |i: usize, j: usize| j * m + i;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(m * m, m * m, &t).unwrap()
    }

    #[test]
    fn diagonal_factor() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (1, 1, 9.0)]).unwrap();
        let f = CholeskyFactor::factor(&a).unwrap();
        let l = f.lower_factor();
        let mut diag: Vec<f64> = (0..2).map(|i| l.get(i, i)).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(diag, vec![2.0, 3.0]);
    }

    #[test]
    fn hand_factor_2x2() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 4.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 3.0)],
        )
        .unwrap();
        let f = CholeskyFactor::factor_with_ordering(&a, vec![0, 1]).unwrap();
        let l = f.lower_factor();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 0), 1.0);
        assert!((l.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.get(0, 1), 0.0);
    }

    #[test]
    fn solve_identity_and_scalar() {
        let f = CholeskyFactor::factor(&SparseMatrix::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let f = CholeskyFactor::factor(&SparseMatrix::from_triplets(1, 1, &[(0, 0, 2.0)]).unwrap())
            .unwrap();
        assert!((f.solve(&[4.0]).unwrap()[0] - 2.0).abs() < 1e-15);
        assert!(matches!(f.solve(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            CholeskyFactor::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_is_rejected() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 0.5), (1, 1, 1.0)])
            .unwrap();
        assert!(matches!(
            CholeskyFactor::factor(&a),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn reconstruction_matches_permuted_input() {
        let a = laplacian_2d(5);
        let f = CholeskyFactor::factor(&a).unwrap();
        let pa = a.permute_symmetric(f.permutation()).to_dense();
        let llt = f.reconstruct_permuted();
        let mut err = 0.0;
        let mut norm = 0.0;
        for i in 0..25 {
            for j in 0..25 {
                err += (llt[i][j] - pa[i][j]).powi(2);
                norm += pa[i][j].powi(2);
            }
        }
        assert!((err / norm).sqrt() <= 1e-12);
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_bandwidth() {
        // scramble a grid Laplacian, RCM should recover a narrow envelope
        let a = laplacian_2d(12);
        let n = a.n_rows();
        let scramble: Vec<usize> = (0..n).map(|i| (i * 37) % n).collect();
        let b = a.permute_symmetric(&scramble);
        let perm = reverse_cuthill_mckee(&b);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let bandwidth = |m: &SparseMatrix| {
            (0..m.n_rows())
                .flat_map(|i| m.row(i).map(move |(j, _)| i.abs_diff(j)))
                .max()
                .unwrap()
        };
        assert!(bandwidth(&b.permute_symmetric(&perm)) <= 2 * 12);
    }
}
