use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric: |A[{row},{col}] - A[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix contains a non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix has a materially negative eigenvalue {value:e} (norm {norm:e})")]
    NegativeEigenvalue { value: f64, norm: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix (residual {residual:e})")]
    EigenNoConvergence { dim: usize, residual: f64 },

    #[error("Cholesky factorization of the conditional covariance failed at step {step}: {source}")]
    SimulationFactorization {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("stationarity requires a + b < 1 (got a = {a}, b = {b})")]
    NonStationary { a: f64, b: f64 },

    #[error("moment formula is undefined: {constant} = {value:e} is not positive")]
    MomentConditionViolated { constant: &'static str, value: f64 },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("all {0} pooled GARCH fits failed")]
    PooledFitFailed(usize),

    #[error("Stieltjes fixed point did not converge (residual {residual:e})")]
    StieltjesNoConvergence { residual: f64 },

    #[error("boundary limit of the Stieltjes transform did not settle (last change {change:e})")]
    BoundaryLimit { change: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
