use thiserror::Error;

use crate::quadrature::QuadratureResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building or evaluating an enclosure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("point {t} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("{side} derivative is undefined at the domain endpoint {t}")]
    UndefinedSide { t: f64, side: &'static str },

    #[error("indeterminate form: {0}")]
    Indeterminate(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "function is not convex: witness pair ({s}, {t}) violates {kind} by {violation:e}"
    )]
    NonConvex {
        s: f64,
        t: f64,
        kind: &'static str,
        violation: f64,
    },

    #[error("function is not differentiable at {t}: left slope {left}, right slope {right}")]
    NotDifferentiable { t: f64, left: f64, right: f64 },

    #[error("endpoint slopes coincide (A = B = {0}); use the plain upper bound for affine functions")]
    DegenerateSlopes(f64),

    #[error("endpoint slope is infinite; the requested bound is unbounded")]
    UnboundedSlope,

    #[error("cell budget of {max_cells} exhausted before reaching the requested width")]
    BudgetExceeded {
        max_cells: usize,
        best: Box<QuadratureResult>,
    },

    #[error("reference integration failed: {0}")]
    OracleFailure(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distributions have different sizes ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("inconsistent model: stored expectation {stored} vs {recomputed} recomputed from the CDF")]
    InconsistentModel { stored: f64, recomputed: f64 },

    #[error("exponent p = {0} is excluded")]
    ExcludedExponent(f64),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl Error {
    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::OracleFailure(_)
                | Error::InternalInconsistency(_)
                | Error::Indeterminate(_)
                | Error::InconsistentModel { .. }
        )
    }
}
