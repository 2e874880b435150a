//! Tikhonov-regularized source reconstruction by conjugate gradients on the
//! normal equations `(S*S + λ) f = S* m`, with every inner product taken in
//! the mass-matrix geometry and `S* = S`.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::fem::{FemSystem, NodalFunction};
use crate::forward::ForwardOperator;
use crate::linalg::{axpy, dot};
use crate::measure::empirical_norm;

pub const DEFAULT_LAMBDA: f64 = 1e-7;
pub const DEFAULT_CG_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Debug, Clone)]
pub struct InverseConfig {
    pub lambda_n: f64,
    pub cg_tol: f64,
    pub max_iter: usize,
    pub f0: NodalFunction,
}

impl InverseConfig {
    pub fn new(f0: NodalFunction) -> Self {
        Self {
            lambda_n: DEFAULT_LAMBDA,
            cg_tol: DEFAULT_CG_TOL,
            max_iter: DEFAULT_MAX_ITER,
            f0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_n > 0.0) || !(self.cg_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter(format!(
                "need lambda_n > 0, cg_tol > 0, max_iter ≥ 1 (got {}, {}, {})",
                self.lambda_n, self.cg_tol, self.max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub f_rec: NodalFunction,
    pub iterations: usize,
    /// `‖p_k‖_M`, starting with the initial direction.
    pub residual_history: Vec<f64>,
    /// `‖r_k‖_M`, starting with the initial residual.
    pub gradient_history: Vec<f64>,
    pub wall_time: f64,
    pub forward_solve_count: usize,
    pub converged: bool,
}

/// State exposed to an observer after each completed iteration.
#[derive(Debug)]
pub struct CgStep<'a> {
    pub iteration: usize,
    pub f: &'a [f64],
    /// Direction used in this iteration and its image under `S*S + λ`.
    pub p: &'a [f64],
    pub ap: &'a [f64],
    pub r: &'a [f64],
    pub alpha: f64,
    pub beta: f64,
}

pub fn cg_reconstruct(
    forward: &dyn ForwardOperator,
    m: &[f64],
    cfg: &InverseConfig,
    sys: &FemSystem,
) -> Result<ReconstructionReport> {
    cg_reconstruct_observed(forward, m, cfg, sys, &mut |_| {})
}

pub fn cg_reconstruct_observed(
    forward: &dyn ForwardOperator,
    m: &[f64],
    cfg: &InverseConfig,
    sys: &FemSystem,
    observer: &mut dyn FnMut(CgStep<'_>),
) -> Result<ReconstructionReport> {
    cfg.validate()?;
    let n = sys.n_dofs();
    check_len(n, m.len())?;
    check_len(n, forward.n_dofs())?;
    check_len(n, cfg.f0.len())?;

    let start = Instant::now();
    let mass = sys.mass();
    let lambda = cfg.lambda_n;
    let mut solves = 0;
    let mut apply = |v: &[f64]| {
        solves += 1;
        forward.apply(v)
    };
    let m_dot = |x: &[f64], mx: &[f64]| dot(x, mx);

    let mut f = cfg.f0.values().to_vec();
    let u0 = apply(&f)?;
    let misfit: Vec<f64> = m.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let mut r = apply(&misfit)?;
    axpy(-lambda, &f, &mut r);
    let mut p = r.clone();

    let mut mr = mass.spmv(&r)?;
    let mut rr = m_dot(&r, &mr);
    let mut error = rr.max(0.0).sqrt();
    let mut residual_history = vec![error];
    let mut gradient_history = vec![error];
    let mut iterations = 0;

    while error >= cfg.cg_tol && iterations < cfg.max_iter {
        let u = apply(&p)?;
        let mut ap = apply(&u)?;
        axpy(lambda, &p, &mut ap);

        let pap = m_dot(&ap, &mass.spmv(&p)?);
        if !pap.is_finite() {
            return Err(Error::NonFinite("cg curvature"));
        }
        if pap <= 0.0 {
            return Err(Error::OperatorNotPositiveDefinite(pap));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut f);
        axpy(-alpha, &ap, &mut r);
        mass.spmv_into(&r, &mut mr);
        let rr_new = m_dot(&r, &mr);
        let beta = rr_new / rr;
        iterations += 1;
        observer(CgStep {
            iteration: iterations,
            f: &f,
            p: &p,
            ap: &ap,
            r: &r,
            alpha,
            beta,
        });

        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        error = mass.spmv(&p).map(|mp| dot(&p, &mp))?.max(0.0).sqrt();
        if !error.is_finite() {
            return Err(Error::NonFinite("cg search direction"));
        }
        residual_history.push(error);
        gradient_history.push(rr.max(0.0).sqrt());
    }

    Ok(ReconstructionReport {
        f_rec: NodalFunction::new(f),
        iterations,
        residual_history,
        gradient_history,
        wall_time: start.elapsed().as_secs_f64(),
        forward_solve_count: solves,
        converged: error < cfg.cg_tol,
    })
}

/// `½‖Sf − m‖_n² + (λ/2)‖f‖_M²`, the empirical-misfit objective.
pub fn objective_value(
    forward: &dyn ForwardOperator,
    sys: &FemSystem,
    f: &[f64],
    m: &[f64],
    lambda_n: f64,
) -> Result<f64> {
    check_len(sys.n_dofs(), m.len())?;
    let sf = forward.apply(f)?;
    let diff: Vec<f64> = sf.iter().zip(m).map(|(a, b)| a - b).collect();
    let misfit = empirical_norm(&diff)?;
    Ok(0.5 * misfit * misfit + 0.5 * lambda_n * sys.m_inner(f, f)?)
}

/// `½‖Sf − m‖_M² + (λ/2)‖f‖_M²`, the quadratic whose M-gradient is `−r`.
pub fn mass_objective_value(
    forward: &dyn ForwardOperator,
    sys: &FemSystem,
    f: &[f64],
    m: &[f64],
    lambda_n: f64,
) -> Result<f64> {
    check_len(sys.n_dofs(), m.len())?;
    let sf = forward.apply(f)?;
    let diff: Vec<f64> = sf.iter().zip(m).map(|(a, b)| a - b).collect();
    Ok(0.5 * sys.m_inner(&diff, &diff)? + 0.5 * lambda_n * sys.m_inner(f, f)?)
}
