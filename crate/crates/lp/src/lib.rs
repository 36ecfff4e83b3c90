//! Dense linear programming with exact dual multipliers.
//!
//! The solver is a bounded-variable revised simplex tuned for the small,
//! bound-heavy LPs that appear in cutting-plane decomposition. Every optimal
//! solution carries row multipliers and a residual report so callers can build
//! cuts without a second solve.

mod mps;
mod problem;
mod simplex;

pub use mps::{to_mps, write_mps};
pub use problem::{LinearProgram, LpBuilder};
pub use simplex::{certificate_report, solve, solve_default, LpSolution, LpStatus, ToleranceReport, DEFAULT_TOL};

/// Errors raised by the LP engine.
#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
