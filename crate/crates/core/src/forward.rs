//! Full-order forward solver: BDF1 start, BDF2 thereafter, zero initial state.

use crate::error::{check_len, Error, Result};
use crate::fem::{FemSystem, NodalFunction};
use crate::linalg::{CholeskyFactor, SparseMatrix};

/// Uniform time grid with `n_steps = ceil(T/dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
    t_final: f64,
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64) -> Result<Self> {
        if !(t_final > 0.0 && dt > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time grid needs T > 0 and dt > 0 (T={t_final}, dt={dt})"
            )));
        }
        let ratio = t_final / dt;
        // ratios within round-off of an integer are not bumped up a step
        let nearest = ratio.round();
        let n_steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        };
        Ok(Self {
            dt,
            n_steps: n_steps.max(1),
            t_final,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }
}

/// A linear (or, for the reduced model, positively homogeneous) map from a
/// source to the final-time state. The discrete adjoint coincides with the
/// operator itself.
pub trait ForwardOperator: Sync {
    fn n_dofs(&self) -> usize;

    fn apply(&self, source: &[f64]) -> Result<Vec<f64>>;
}

/// `S f = u_h(T)` with the implicit-step matrices factored once.
#[derive(Debug)]
pub struct FemForward<'a> {
    sys: &'a FemSystem,
    grid: TimeGrid,
    bdf1: CholeskyFactor,
    bdf2: CholeskyFactor,
}

fn implicit_matrix(sys: &FemSystem, mass_coeff: f64) -> Result<SparseMatrix> {
    sys.mass().add_scaled(mass_coeff, sys.stiffness(), 1.0)
}

impl<'a> FemForward<'a> {
    pub fn new(sys: &'a FemSystem, grid: TimeGrid) -> Result<Self> {
        let dt = grid.dt();
        let bdf1 =
            CholeskyFactor::factor_with_ordering(&implicit_matrix(sys, 1.0 / dt)?, sys.ordering().to_vec())?;
        let bdf2 = CholeskyFactor::factor_with_ordering(
            &implicit_matrix(sys, 1.5 / dt)?,
            sys.ordering().to_vec(),
        )?;
        Ok(Self {
            sys,
            grid,
            bdf1,
            bdf2,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn system(&self) -> &FemSystem {
        self.sys
    }

    /// Back-substitutions performed so far across both step matrices.
    pub fn solve_count(&self) -> usize {
        self.bdf1.solve_count() + self.bdf2.solve_count()
    }

    pub fn solve(&self, f: &NodalFunction) -> Result<NodalFunction> {
        self.apply(f.values()).map(NodalFunction::new)
    }
}

impl ForwardOperator for FemForward<'_> {
    fn n_dofs(&self) -> usize {
        self.sys.n_dofs()
    }

    fn apply(&self, source: &[f64]) -> Result<Vec<f64>> {
        let n = self.sys.n_dofs();
        check_len(n, source.len())?;
        let mass = self.sys.mass();
        let inv_dt = 1.0 / self.grid.dt();
        let b = mass.spmv(source)?;

        let mut prev = vec![0.0; n]; // u^{k-2}
        let mut curr = vec![0.0; n]; // u^{k-1}
        self.bdf1.solve_into(&b, &mut curr);
        check_finite(&curr)?;

        let mut history = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut next = vec![0.0; n];
        for _ in 2..=self.grid.n_steps() {
            for i in 0..n {
                history[i] = 2.0 * curr[i] - 0.5 * prev[i];
            }
            mass.spmv_into(&history, &mut rhs);
            for i in 0..n {
                rhs[i] = b[i] + inv_dt * rhs[i];
            }
            self.bdf2.solve_into(&rhs, &mut next);
            check_finite(&next)?;
            std::mem::swap(&mut prev, &mut curr);
            std::mem::swap(&mut curr, &mut next);
        }
        Ok(curr)
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("time step"))
    }
}

pub fn fem_forward_solve(
    sys: &FemSystem,
    f: &NodalFunction,
    grid: TimeGrid,
) -> Result<NodalFunction> {
    FemForward::new(sys, grid)?.solve(f)
}

pub fn fem_forward_operator(sys: &FemSystem, grid: TimeGrid) -> Result<FemForward<'_>> {
    FemForward::new(sys, grid)
}
