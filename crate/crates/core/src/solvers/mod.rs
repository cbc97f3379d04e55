//! Dense optimization kernels: a two-phase simplex solver for the linear
//! subproblems and a feasible-start log-barrier interior point method for the
//! trace-minimization semidefinite program.
//!
//! Problem sizes here are small in variables (<= ~200) but can be large in
//! constraint count (~10^4), which drives the design: full dense tableaus and
//! explicit Newton systems over the packed symmetric parametrization.

mod lp;
mod sdp;

pub use lp::{solve_lp, LinearProgram};
pub use sdp::{constraint_violations as sdp_violations, solve_sdp_tracemin, SdpOptions, SdpProblem};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Numerical,
}

/// Diagnostics attached to every solver exit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub objective: f64,
    pub kkt_residual: f64,
}

impl SolveReport {
    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::MaxIter)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("linear program is infeasible (certificate residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("problem dimensions exceed solver limits: {0}")]
    TooLarge(String),
    #[error("invalid problem data: {0}")]
    BadProblem(String),
}
