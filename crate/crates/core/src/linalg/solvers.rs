use std::sync::Arc;

use super::{gmres, lu_factor, DenseMatrix, GmresTrace, DEFAULT_GMRES_CAP};
use crate::error::Result;
use crate::registry::Registry;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    /// Present for iterative solvers.
    pub trace: Option<GmresTrace>,
}

/// A way of solving `A x = b` for a dense system.
pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// `tol` and `max_iter` are ignored by direct methods. A `max_iter` of
    /// `None` selects the solver's default cap.
    fn solve(&self, a: &DenseMatrix, b: &[f64], tol: f64, max_iter: Option<usize>) -> Result<LinearSolution>;
}

/// LU with partial pivoting.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSolver;

impl LinearSolver for DirectSolver {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn solve(&self, a: &DenseMatrix, b: &[f64], _tol: f64, _max_iter: Option<usize>) -> Result<LinearSolution> {
        let x = lu_factor(a)?.solve(b)?;
        Ok(LinearSolution { x, trace: None })
    }
}

/// Non-restarted GMRES; the cap defaults to `min(n, 400)`. Hitting the cap
/// is reported in the trace, not as an error.
#[derive(Debug, Clone, Copy, Default)]
pub struct GmresSolver;

impl LinearSolver for GmresSolver {
    fn name(&self) -> &'static str {
        "gmres"
    }

    fn solve(&self, a: &DenseMatrix, b: &[f64], tol: f64, max_iter: Option<usize>) -> Result<LinearSolution> {
        let cap = max_iter.unwrap_or_else(|| a.n().min(DEFAULT_GMRES_CAP));
        let trace = gmres(a, b, tol, cap)?;
        Ok(LinearSolution {
            x: trace.solution.clone(),
            trace: Some(trace),
        })
    }
}

pub fn default_solvers() -> Registry<dyn LinearSolver> {
    let mut reg: Registry<dyn LinearSolver> = Registry::new("linear solver");
    reg.register(&["direct", "lu"], Arc::new(DirectSolver));
    reg.register(&["gmres"], Arc::new(GmresSolver));
    reg
}
