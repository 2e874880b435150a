use crate::error::{check_len, Error, Result};

/// Compressed-sparse-row matrix.
///
/// Column indices are strictly increasing within each row and exact zeros
/// are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(row, col, _) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }

        // bucket by row, then sort each row by column
        let mut counts = vec![0usize; n_rows + 1];
        for &(row, _, _) in triplets {
            counts[row + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for &(row, col, value) in triplets {
            bucket[next[row]] = (col, value);
            next[row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for i in 0..n_rows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == col {
                    sum += row[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_indices.push(col);
                    values.push(sum);
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles directly from already-sorted CSR arrays. Used internally where
    /// the pattern is known to be valid.
    pub(crate) fn from_raw_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), n_rows + 1);
        debug_assert_eq!(*row_offsets.last().unwrap(), values.len());
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, x.len())?;
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = self * x` without allocating. Lengths must already agree.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    /// Returns `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<Self> {
        check_len(self.n_rows, other.n_rows)?;
        check_len(self.n_cols, other.n_cols)?;
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            triplets.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        Self::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    /// Largest `|a(i,j) - a(j,i)|` over stored entries, with its location.
    pub fn symmetry_defect(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let d = if j < self.n_rows && i < self.n_cols {
                    (v - self.get(j, i)).abs()
                } else {
                    v.abs()
                };
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && self.symmetry_defect().2 == 0.0
    }

    /// Symmetric permutation `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let n = self.n_rows;
        let mut inverse = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            scratch.clear();
            scratch.extend(self.row(old).map(|(j, v)| (inverse[j], v)));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_raw_parts(n, n, row_offsets, col_indices, values)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pattern() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a, SparseMatrix::identity(2));
        assert_eq!(a.row_offsets(), &[0, 1, 2]);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 2.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn cancelling_entries_are_dropped() {
        let a = SparseMatrix::from_triplets(2, 2, &[(1, 0, 2.0), (1, 0, -2.0), (0, 0, 1.0)])
            .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.row_offsets(), &[0, 1, 1]);
    }

    #[test]
    fn out_of_range_index() {
        let err = SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { row: 2, .. }));
    }

    #[test]
    fn unordered_triplets_give_sorted_rows() {
        let a = SparseMatrix::from_triplets(
            2,
            3,
            &[(0, 2, 1.0), (1, 1, 4.0), (0, 0, 2.0), (1, 0, 3.0), (0, 1, 5.0)],
        )
        .unwrap();
        assert_eq!(a.col_indices(), &[0, 1, 2, 0, 1]);
        assert_eq!(a.values(), &[2.0, 5.0, 1.0, 3.0, 4.0]);
    }

    #[test]
    fn spmv_cases() {
        let x = [1.5, -2.0, 0.25];
        assert_eq!(SparseMatrix::identity(3).spmv(&x).unwrap(), x.to_vec());

        let zero = SparseMatrix::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(zero.spmv(&x).unwrap(), vec![0.0; 3]);

        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)],
        )
        .unwrap();
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert!(matches!(
            a.spmv(&x),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn permutation_round_trip() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (0, 2, 7.0), (2, 0, 7.0), (1, 1, 2.0), (2, 2, 3.0)],
        )
        .unwrap();
        let perm = [2, 0, 1];
        let p = a.permute_symmetric(&perm);
        for new_i in 0..3 {
            for new_j in 0..3 {
                assert_eq!(p.get(new_i, new_j), a.get(perm[new_i], perm[new_j]));
            }
        }
        assert!(p.is_symmetric());
    }
}
