use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cell width h must be positive and finite, got {0}")]
    InvalidSpacing(f64),

    #[error("fractional exponent s must lie in (0, 1), got {0}")]
    InvalidExponent(f64),

    #[error("domain has no intervals")]
    EmptyDomain,

    #[error("interval #{index} ({left}, {right}) must have right > left")]
    InvalidInterval { index: usize, left: f64, right: f64 },

    #[error("interval #{index} ({left}, {right}) collapses to zero cells at h = {h}")]
    IntervalCollapsed {
        index: usize,
        left: f64,
        right: f64,
        h: f64,
    },

    #[error("intervals ({0}, {1}) and ({2}, {3}) overlap or touch after snapping")]
    Overlap(f64, f64, f64, f64),

    #[error("mass beta = {beta} outside (0, {max}]")]
    MassOutOfRange { beta: f64, max: f64 },

    #[error("selection size k = {k} outside [1, {n}]")]
    SelectionOutOfRange { k: usize, n: usize },

    #[error("kernel index m must be >= 1, got {0}")]
    InvalidKernelIndex(u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Cholesky factorization failed; operator is not positive definite")]
    Factorization,

    #[error("invalid solver parameter: {0}")]
    InvalidSolverParameter(String),

    #[error("iterative solve did not reach tolerance after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("brute force would enumerate {count} subsets, above the budget of {limit}")]
    BudgetExceeded { count: u128, limit: u128 },

    #[error("two-component experiment: {0}")]
    Experiment(String),
}

pub(crate) fn check_exponent(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(s))
    }
}

pub(crate) fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpacing(h))
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
