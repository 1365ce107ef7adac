//! Green-function columns by direct solve or Jacobi-preconditioned CG.

use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::fd::operator::SpdOperator;

pub const CG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum Solver {
    /// Banded LDL^T (dense when a periodic x axis fills the band).
    #[default]
    Direct,
    ConjugateGradient { tol: f64, max_iter: usize },
}

impl Solver {
    pub fn cg() -> Self {
        Solver::ConjugateGradient { tol: CG_TOLERANCE, max_iter: 20_000 }
    }
}

/// Column G(., source) of the discrete Green function, A G = delta / dx^dim.
pub fn green_column(op: &SpdOperator, source: usize, solver: Solver) -> Result<Vec<f64>> {
    if source >= op.n {
        return Err(CasimirError::config(format!("source index {source} outside grid of {} nodes", op.n)));
    }
    let mut rhs = vec![0.0; op.n];
    rhs[source] = 1.0 / op.cell_volume;
    solve(op, &rhs, solver)
}

pub fn solve(op: &SpdOperator, rhs: &[f64], solver: Solver) -> Result<Vec<f64>> {
    match solver {
        Solver::Direct => {
            let mut x = rhs.to_vec();
            op.factor()?.solve(&mut x);
            Ok(x)
        }
        Solver::ConjugateGradient { tol, max_iter } => conjugate_gradient(op, rhs, tol, max_iter),
    }
}

/// Preconditioned CG to ||r|| <= tol ||b||.
pub fn conjugate_gradient(op: &SpdOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = op.n;
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, c)| a * c).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    for it in 0..max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(CasimirError::Solver(format!(
                "CG breakdown at iteration {it}: p.Ap = {pap:e} (operator not positive definite)"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok(x);
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
    let step = (history.len() / 10).max(1);
    let sampled: Vec<String> = history.iter().step_by(step).map(|v| format!("{v:.2e}")).collect();
    Err(CasimirError::Solver(format!(
        "CG not converged to {tol:e} in {max_iter} iterations; relative residuals: [{}], last {:.2e}",
        sampled.join(", "),
        history.last().copied().unwrap_or(1.0)
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
