use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid edge ({i}, {j}, {w}): {reason}")]
    InvalidEdge {
        i: usize,
        j: usize,
        w: f64,
        reason: &'static str,
    },

    #[error("point {point} has a zero k-th neighbor distance (duplicate points)")]
    DuplicatePoint { point: usize },

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("vector must be mean-zero (sum = {sum:e})")]
    NotMeanZero { sum: f64 },

    #[error("class {class} has no mass")]
    EmptyClass { class: usize },

    #[error("signed measure is zero; the conductance program is infeasible")]
    ZeroMeasure,

    #[error("conjugate gradient breakdown at iteration {iteration} (pᵀAp = {curvature:e})")]
    CgBreakdown {
        iteration: usize,
        curvature: f64,
        iterate: Vec<f64>,
    },

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("scalar prox did not converge (v = {v}, p = {p})")]
    ProxNoConvergence { v: f64, p: f64 },

    #[error("line search failed after {halvings} halvings (‖∇f‖ = {grad_norm:e})")]
    LineSearch { halvings: usize, grad_norm: f64 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program did not terminate after {0} pivots")]
    PivotLimit(usize),

    #[error("instance too large for this routine: {0}")]
    TooLarge(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
