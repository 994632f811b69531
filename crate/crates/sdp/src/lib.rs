//! Dense primal-dual interior-point solver for small block-diagonal
//! semidefinite programs.
//!
//! Problems are stated in the "linear matrix inequality" form
//!
//! ```text
//! maximize    c^T y
//! subject to  S(y) = C0 + sum_k y_k A_k  is positive semidefinite
//! ```
//!
//! where `C0` and every `A_k` are sparse symmetric block-diagonal matrices.
//! The conic dual is
//!
//! ```text
//! minimize    <C0, X>
//! subject to  <A_k, X> = -c_k,   X positive semidefinite
//! ```
//!
//! and every feasible `X` certifies `c^T y <= <C0, X>`.

mod ipm;
mod problem;
mod sdpa;

pub use ipm::{InteriorPoint, IpmOptions};
pub use problem::{BlockSdp, SparseSym, SymEntry};
pub use sdpa::write_sdpa;

use faer::Mat;

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped at the iteration limit; the iterate is still returned.
    MaxIterations,
    /// Step lengths collapsed before the tolerance was met.
    Stalled,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("numerical failure in {stage} after {iterations} iterations")]
    Numerical { stage: &'static str, iterations: usize },
    #[error("solver did not converge: status {status:?}, relative gap {gap:.3e}, infeasibility {infeasibility:.3e}")]
    NotConverged { status: SolveStatus, gap: f64, infeasibility: f64 },
}

/// Result of a solve: the LMI-side iterate `y`, its slack `S(y)` and the
/// dual matrix `X`, one dense matrix per block.
#[derive(Debug, Clone)]
pub struct BlockSdpSolution {
    pub y: Vec<f64>,
    pub slack: Vec<Mat<f64>>,
    pub dual: Vec<Mat<f64>>,
    /// `c^T y`.
    pub objective: f64,
    /// `<C0, X>`.
    pub dual_objective: f64,
    /// `|<C0,X> - c^T y| / (1 + |c^T y| + |<C0,X>|)`.
    pub relative_gap: f64,
    /// Relative residual of the dual equality constraints.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Anything that can solve a [`BlockSdp`].
pub trait ConicSolver {
    fn solve(&self, problem: &BlockSdp) -> Result<BlockSdpSolution, SolverError>;
}
