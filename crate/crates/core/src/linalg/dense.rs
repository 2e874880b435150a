//! Small dense kernels for the reduced-order system (dimension ≤ ℓ).

use crate::error::{Error, Result};

/// Row-major symmetric matrix of small dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl DenseSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim * dim],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            dim: 1,
            values: vec![value],
        }
    }

    /// Builds from row-major values, rejecting asymmetry beyond round-off.
    pub fn from_row_major(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: values.len(),
            });
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let diff = (values[i * dim + j] - values[j * dim + i]).abs();
                if diff > 1e-12 * scale {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(Self { dim, values })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.values[i * dim + j] = v;
                m.values[j * dim + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `[[self, αᵀ], [α, β]]`.
    pub fn bordered(&self, alpha: &[f64], beta: f64) -> Result<Self> {
        if alpha.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: alpha.len(),
            });
        }
        let d = self.dim + 1;
        let mut values = vec![0.0; d * d];
        for i in 0..self.dim {
            values[i * d..i * d + self.dim]
                .copy_from_slice(&self.values[i * self.dim..(i + 1) * self.dim]);
            values[i * d + self.dim] = alpha[i];
            values[self.dim * d + i] = alpha[i];
        }
        values[d * d - 1] = beta;
        Ok(Self { dim: d, values })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.values[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self * a + other * b`.
    pub fn combine(&self, a: f64, other: &DenseSymMatrix, b: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Eigendecomposition `K ψ_i = λ_i ψ_i`, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Sweeps until the off-diagonal Frobenius norm drops to `1e-14·‖K‖_F`.
pub fn sym_eig_small(k: &DenseSymMatrix) -> Result<SymEigen> {
    let n = k.dim;
    if n > 32 {
        return Err(Error::InvalidParameter(format!(
            "dense eigensolver limited to dim ≤ 32, got {n}"
        )));
    }
    let mut a = k.values.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = k.frobenius_norm();
    let threshold = 1e-14 * norm;

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Diverged(format!(
                "jacobi did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| (0..n).map(|r| v[r * n + col]).collect())
        .collect();
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Dense Cholesky of a small SPD matrix, for the reduced time stepping.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl DenseCholesky {
    pub fn factor(a: &DenseSymMatrix) -> Result<Self> {
        let n = a.dim;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                let v = a.get(i, j) - s;
                if i == j {
                    if !(v > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: v });
                    }
                    l[i * n + i] = v.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        assert_eq!(b.len(), n);
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
            y[i] = (y[i] - s) / l[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * y[k]).sum();
            y[i] = (y[i] - s) / l[i * n + i];
        }
        y
    }
}
