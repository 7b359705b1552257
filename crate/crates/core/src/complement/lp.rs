//! Thin wrapper over the simplex solver.

use microlp::{OptimizationDirection, Problem, Solution};

use crate::error::{Error, Result};

pub(crate) const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
pub(crate) const NONNEG: (f64, f64) = (0.0, f64::INFINITY);

pub(crate) fn minimize() -> Problem {
    Problem::new(OptimizationDirection::Minimize)
}

pub(crate) fn solve(problem: &Problem) -> Result<Solution> {
    let outcome = problem.solve().map_err(|e| Error::Solver(format!("{e:?}")))?;
    outcome
        .into_solution()
        .map_err(|_| Error::Solver("interrupted before a feasible point was found".into()))
}
