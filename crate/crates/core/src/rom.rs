//! Krylov-sequence reduced-order forward solver.
//!
//! The basis is built from `A u₁ = b`, `A u_i = M u_{i−1}`. Its Gram matrix in
//! the energy inner product, `K_i = U_iᵀ A U_i`, is grown one row and column
//! at a time and re-diagonalized after every step. With `A` and `M` symmetric
//! the Gram matrix is Hankel, `K(i, j) = K(i−1, j+1)`, so each new row reuses
//! the previous one and only needs the two products `u_{i−1}ᵀ M u_{i−1}` and
//! `u_iᵀ M u_{i−1}`; no product with `A` is ever formed.
//!
//! The retained eigenpairs `(λ_k, ψ_k)` give the columns `U ψ_k / √λ_k` of `Q`.
//! One symmetric re-orthonormalization in the energy inner product follows, so
//! `QᵀAQ = I` holds to rounding even when the retained spectrum spans many
//! decades.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{check_len, Error, Result};
use crate::fem::{FemSystem, NodalFunction};
use crate::forward::{ForwardOperator, TimeGrid};
use crate::linalg::{dot, sym_eig_small, DenseCholesky, DenseSymMatrix};

pub const DEFAULT_ELL: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-14;

/// Energy-orthonormal reduced basis.
#[derive(Debug, Clone)]
pub struct RomBasis {
    /// Columns of `Q`, each of length `N`.
    q: Vec<Vec<f64>>,
    retained_eigenvalues: Vec<f64>,
    ell_requested: usize,
    krylov_vectors: usize,
    /// Eigenvalues of every `K_i` formed, descending.
    bordering_spectra: Vec<Vec<f64>>,
    gram: DenseSymMatrix,
    krylov: Vec<Vec<f64>>,
    raw_defect: f64,
}

impl RomBasis {
    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn retained_eigenvalues(&self) -> &[f64] {
        &self.retained_eigenvalues
    }

    pub fn ell_requested(&self) -> usize {
        self.ell_requested
    }

    /// Number of Krylov vectors computed, i.e. solves with the stiffness factor.
    pub fn krylov_vectors(&self) -> usize {
        self.krylov_vectors
    }

    pub fn bordering_spectra(&self) -> &[Vec<f64>] {
        &self.bordering_spectra
    }

    /// The last Gram matrix `K_i` formed by bordering.
    pub fn gram(&self) -> &DenseSymMatrix {
        &self.gram
    }

    /// The Krylov vectors `u_1 … u_i`.
    pub fn krylov(&self) -> &[Vec<f64>] {
        &self.krylov
    }

    /// `‖QᵀAQ − I‖_F` of `U Ψ Λ^{-1/2}` before the energy re-orthonormalization.
    pub fn raw_orthonormality_defect(&self) -> f64 {
        self.raw_defect
    }

    /// `Q x` for a reduced coefficient vector.
    pub fn prolong(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rank());
        let n = self.q.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (col, &c) in self.q.iter().zip(x) {
            for (o, v) in out.iter_mut().zip(col) {
                *o += c * v;
            }
        }
        out
    }

    /// `Qᵀ v`.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.q.iter().map(|col| dot(col, v)).collect()
    }
}

/// Replaces `Q` by `Q G^{-1/2}` with `G = QᵀAQ`.
fn energy_orthonormalize(sys: &FemSystem, q: Vec<Vec<f64>>) -> Result<(Vec<Vec<f64>>, f64)> {
    let r = q.len();
    let aq = q.iter().map(|c| sys.stiffness().spmv(c)).collect::<Result<Vec<_>>>()?;
    let g = DenseSymMatrix::from_fn(r, |i, j| 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i])));
    let defect = (0..r)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .map(|(i, j)| (g.get(i, j) - if i == j { 1.0 } else { 0.0 }).powi(2))
        .sum::<f64>()
        .sqrt();
    let eig = sym_eig_small(&g)?;
    if eig.eigenvalues.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::NotPositiveDefinite { row: r, pivot: eig.eigenvalues[r - 1] });
    }
    let inv_sqrt = DenseSymMatrix::from_fn(r, |i, j| {
        (0..r)
            .map(|k| eig.eigenvectors[k][i] * eig.eigenvectors[k][j] / eig.eigenvalues[k].sqrt())
            .sum()
    });
    let n = q.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; n]; r];
    for (j, col) in out.iter_mut().enumerate() {
        for (i, qi) in q.iter().enumerate() {
            let c = inv_sqrt.get(i, j);
            for (o, v) in col.iter_mut().zip(qi) {
                *o += c * v;
            }
        }
    }
    Ok((out, defect))
}

pub fn get_matrix_q(sys: &FemSystem, b: &[f64], ell: usize, tol: f64) -> Result<RomBasis> {
    let n = sys.n_dofs();
    check_len(n, b.len())?;
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rom tolerance {tol} must be positive")));
    }
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroLoadVector);
    }
    let factor = sys.stiffness_factor();
    let mass = sys.mass();

    let u1 = factor.solve(b)?;
    let k1 = dot(&u1, b);
    let mut krylov = vec![u1];
    let mut gram = DenseSymMatrix::scalar(k1);
    let mut eig = sym_eig_small(&gram)?;
    let mut spectra = vec![eig.eigenvalues.clone()];
    let mut retained = 1;

    let mut m_prev = vec![0.0; n];
    for i in 2..=ell {
        let prev = krylov.last().unwrap();
        mass.spmv_into(prev, &mut m_prev);
        let ui = factor.solve(&m_prev)?;

        // new row: Hankel shift of the previous last row, then u_{i−1}ᵀ A u_i
        let mut alpha: Vec<f64> = (0..i - 2).map(|j| gram.get(i - 2, j + 1)).collect();
        alpha.push(dot(prev, &m_prev));
        let beta = dot(&ui, &m_prev);
        krylov.push(ui);
        gram = gram.bordered(&alpha, beta)?;
        eig = sym_eig_small(&gram)?;
        spectra.push(eig.eigenvalues.clone());

        if eig.eigenvalues[i - 1] <= tol {
            retained = i - 1;
            break;
        }
        retained = i;
    }

    let raw: Vec<Vec<f64>> = (0..retained)
        .map(|k| {
            let scale = 1.0 / eig.eigenvalues[k].sqrt();
            let mut col = vec![0.0; n];
            for (u, &c) in krylov.iter().zip(&eig.eigenvectors[k]) {
                let w = c * scale;
                for (o, v) in col.iter_mut().zip(u) {
                    *o += w * v;
                }
            }
            col
        })
        .collect();
    let (q, raw_defect) = energy_orthonormalize(sys, raw)?;

    Ok(RomBasis {
        q,
        raw_defect,
        retained_eigenvalues: eig.eigenvalues[..retained].to_vec(),
        ell_requested: ell,
        krylov_vectors: krylov.len(),
        bordering_spectra: spectra,
        gram,
        krylov,
    })
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub m_r: DenseSymMatrix,
    pub a_r: DenseSymMatrix,
    pub b_r: Vec<f64>,
}

/// `QᵀMQ`, `QᵀAQ`, `Qᵀb`.
pub fn reduce(sys: &FemSystem, basis: &RomBasis, b: &[f64]) -> Result<ReducedSystem> {
    let n = sys.n_dofs();
    check_len(n, b.len())?;
    for col in basis.q() {
        check_len(n, col.len())?;
    }
    let r = basis.rank();
    let mq: Vec<Vec<f64>> = basis.q().iter().map(|c| sys.mass().spmv(c)).collect::<Result<_>>()?;
    let aq: Vec<Vec<f64>> = basis
        .q()
        .iter()
        .map(|c| sys.stiffness().spmv(c))
        .collect::<Result<_>>()?;
    let q = basis.q();
    let m_r = DenseSymMatrix::from_fn(r, |i, j| dot(&q[i], &mq[j]));
    let a_r = DenseSymMatrix::from_fn(r, |i, j| dot(&q[i], &aq[j]));
    Ok(ReducedSystem {
        m_r,
        a_r,
        b_r: basis.restrict(b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RomSolveStats {
    pub krylov_vectors: usize,
    pub rank: usize,
    pub dense_solves: usize,
}

/// Reduced BDF1/BDF2 stepping; returns the final reduced coefficients.
pub fn step_reduced(red: &ReducedSystem, grid: TimeGrid) -> Result<(Vec<f64>, usize)> {
    let inv_dt = 1.0 / grid.dt();
    let bdf1 = DenseCholesky::factor(&red.m_r.combine(inv_dt, &red.a_r, 1.0))?;
    let bdf2 = DenseCholesky::factor(&red.m_r.combine(1.5 * inv_dt, &red.a_r, 1.0))?;

    let r = red.b_r.len();
    let mut prev = vec![0.0; r];
    let mut curr = bdf1.solve(&red.b_r);
    let mut solves = 1;
    for _ in 2..=grid.n_steps() {
        let hist: Vec<f64> = curr.iter().zip(&prev).map(|(c, p)| 2.0 * c - 0.5 * p).collect();
        let rhs: Vec<f64> = red
            .m_r
            .matvec(&hist)
            .into_iter()
            .zip(&red.b_r)
            .map(|(m, b)| inv_dt * m + b)
            .collect();
        let next = bdf2.solve(&rhs);
        solves += 1;
        prev = std::mem::replace(&mut curr, next);
    }
    if curr.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reduced time step"));
    }
    Ok((curr, solves))
}

pub fn rom_forward_solve_with_stats(
    sys: &FemSystem,
    f: &NodalFunction,
    grid: TimeGrid,
    ell: usize,
    tol: f64,
) -> Result<(NodalFunction, RomSolveStats)> {
    let b = sys.load_vector(f)?;
    let basis = get_matrix_q(sys, &b, ell, tol)?;
    let red = reduce(sys, &basis, &b)?;
    let (ur, dense_solves) = step_reduced(&red, grid)?;
    let stats = RomSolveStats {
        krylov_vectors: basis.krylov_vectors(),
        rank: basis.rank(),
        dense_solves,
    };
    Ok((NodalFunction::new(basis.prolong(&ur)), stats))
}

pub fn rom_forward_solve(
    sys: &FemSystem,
    f: &NodalFunction,
    grid: TimeGrid,
    ell: usize,
    tol: f64,
) -> Result<NodalFunction> {
    rom_forward_solve_with_stats(sys, f, grid, ell, tol).map(|(u, _)| u)
}

/// Reduced forward operator. A fresh basis is built for every source; a zero
/// source maps to zero without building one.
#[derive(Debug)]
pub struct RomForward<'a> {
    sys: &'a FemSystem,
    grid: TimeGrid,
    ell: usize,
    tol: f64,
    applications: AtomicUsize,
    rank_total: AtomicUsize,
}

impl<'a> RomForward<'a> {
    pub fn new(sys: &'a FemSystem, grid: TimeGrid, ell: usize, tol: f64) -> Result<Self> {
        if ell == 0 || !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rom needs ell ≥ 1 and tol > 0 (ell={ell}, tol={tol})"
            )));
        }
        Ok(Self {
            sys,
            grid,
            ell,
            tol,
            applications: AtomicUsize::new(0),
            rank_total: AtomicUsize::new(0),
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Mean retained rank over all non-trivial applications so far.
    pub fn mean_rank(&self) -> f64 {
        let apps = self.applications.load(Ordering::Relaxed);
        if apps == 0 {
            return 0.0;
        }
        self.rank_total.load(Ordering::Relaxed) as f64 / apps as f64
    }
}

impl ForwardOperator for RomForward<'_> {
    fn n_dofs(&self) -> usize {
        self.sys.n_dofs()
    }

    fn apply(&self, source: &[f64]) -> Result<Vec<f64>> {
        check_len(self.sys.n_dofs(), source.len())?;
        if source.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; source.len()]);
        }
        let f = NodalFunction::new(source.to_vec());
        let (u, stats) = rom_forward_solve_with_stats(self.sys, &f, self.grid, self.ell, self.tol)?;
        self.applications.fetch_add(1, Ordering::Relaxed);
        self.rank_total.fetch_add(stats.rank, Ordering::Relaxed);
        Ok(u.into_values())
    }
}
