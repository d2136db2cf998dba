//! Floating-point layer: finite-difference solutions of the equation,
//! numeric flows of generators, and the graph-transform symmetry check.
//!
//! Everything here is deterministic — fixed lattices, fixed substep counts,
//! sequential sweeps — so reported norms and verdicts are reproducible
//! bit-for-bit across runs and platforms (all transcendentals go through
//! `libm`).

mod check;
mod flow;
mod grid;
mod solver;

pub use check::{
    check_symmetry, interpolate, CheckConfig, EpsilonReport, SymmetryCheck, Verdict,
};
pub use flow::{flow_method, map_point, Flow, FlowMethod};
pub use grid::{csv_slice, Field3, Grid};
pub use solver::{
    exact_solution_linear_drift, independent_residual, sample_drift, solve_fd, stencil_residual,
    Solution,
};

use crate::expr::EvalError;

/// Why a numeric computation could not proceed.
#[derive(Clone, Debug, PartialEq)]
pub enum NumericError {
    /// Lattice geometry is unusable; the message names the constraint.
    BadGrid(&'static str),
    /// The explicit advection step would be unstable at this resolution.
    CflViolation { max_drift: f64, suggested_nt: usize },
    /// A pointwise evaluation failed (unbound name, domain violation, …).
    Eval(EvalError),
    /// The generator moves base coordinates by amounts depending on `u`;
    /// its action on solution graphs is not a pointwise coordinate map.
    FiberDependentGeometry,
}

impl From<EvalError> for NumericError {
    fn from(e: EvalError) -> NumericError {
        NumericError::Eval(e)
    }
}

impl core::fmt::Display for NumericError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NumericError::BadGrid(what) => write!(f, "bad grid: {what}"),
            NumericError::CflViolation {
                max_drift,
                suggested_nt,
            } => write!(
                f,
                "time step violates the advection stability bound \
                 (max |f| = {max_drift}); use at least {suggested_nt} steps"
            ),
            NumericError::Eval(e) => write!(f, "evaluation failed: {e}"),
            NumericError::FiberDependentGeometry => write!(
                f,
                "base components depend on u; the graph transform needs a \
                 pointwise coordinate map"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NumericError {}
