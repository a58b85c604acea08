//! Solvers for `min |L|_* + lambda |S|_1  s.t.  P_O[L + S] = P_O[Y]`.
//!
//! [`solve_rmc`] is an alternating-direction splitting; [`solve_rmc_reference`]
//! is an independent primal-dual method used to cross-check it.

mod admm;
mod primal_dual;
mod prox;

pub use admm::solve_rmc;
pub use primal_dual::solve_rmc_reference;
pub use prox::{soft_threshold, svt, svt_with_norm, Shrunk};

use crate::error::{Error, Result};
use crate::harness::record::{Field, Record};
use crate::model::{l1_norm, nuclear_norm, Matrix};
use crate::theorem_lambda;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Augmented-Lagrangian penalty. `None` picks `n^2 / (4 |P_O[Y]|_1)`.
    pub mu: Option<f64>,
    pub max_iters: usize,
    /// Relative to `1 + |P_O[Y]|_F`.
    pub primal_tol: f64,
    /// Relative to `1 + |P_O[Y]|_F`.
    pub dual_tol: f64,
    /// Keep the per-iteration objective in [`RecoveryResult::history`].
    pub record_history: bool,
}

impl SolverConfig {
    /// Defaults for an `n x n` problem with `lambda = 1/sqrt(n log n)`.
    pub fn for_size(n: usize) -> Self {
        Self {
            lambda: theorem_lambda(n),
            mu: None,
            max_iters: 10_000,
            primal_tol: 1e-10,
            dual_tol: 1e-10,
            record_history: false,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(format!("lambda {} must be positive", self.lambda)));
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::param(format!("mu {mu} must be positive")));
            }
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return Err(Error::param("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub l: Matrix,
    /// Zero off the observation set.
    pub s: Matrix,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl RecoveryResult {
    fn zero(n: usize) -> Self {
        Self {
            l: Matrix::zeros(n, n),
            s: Matrix::zeros(n, n),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            objective: 0.0,
            converged: true,
            history: Vec::new(),
        }
    }
}

impl Record for RecoveryResult {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("iterations", Field::Int(self.iterations as i64)),
            ("primal_residual", Field::Float(self.primal_residual)),
            ("dual_residual", Field::Float(self.dual_residual)),
            ("objective", Field::Float(self.objective)),
            ("converged", Field::Bool(self.converged)),
        ]
    }
}

/// `|L|_* + lambda |S|_1`.
pub fn objective(l: &Matrix, s: &Matrix, lambda: f64) -> f64 {
    nuclear_norm(l) + lambda * l1_norm(s)
}

/// `objective(L*, S*) - objective(L0, S̄0)`. Values well below zero mean the
/// ground truth is not optimal for the program.
pub fn optimality_gap(result: &RecoveryResult, l0: &Matrix, s0_bar: &Matrix, lambda: f64) -> f64 {
    objective(&result.l, &result.s, lambda) - objective(l0, s0_bar, lambda)
}
