use thiserror::Error;

/// Errors raised by the kernels, solvers and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A point that must lie in the open box (or chart range) does not.
    #[error("coordinate {index} = {value} is outside the open domain ({lower}, {upper})")]
    DomainViolation {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("tangent vector leaves the chart (0, pi) at coordinate {index} (image {image})")]
    TangentOutOfRange { index: usize, image: f64 },

    #[error("matrix is numerically rank deficient (rank {rank} < {required})")]
    RankDeficient { rank: usize, required: usize },

    #[error("endpoint {which} is not on the solution surface (range residual {residual:e} > {tolerance:e})")]
    NotOnSurface {
        which: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("datum is not attainable in the interior of A(K): {0}")]
    InfeasibleDatum(String),

    #[error("marginal totals differ: rows sum to {row_total}, columns sum to {col_total}")]
    MarginalMismatch { row_total: f64, col_total: f64 },

    #[error("moment {row} = {value} is unattainable within the prior band [{min}, {max}]")]
    BandViolation {
        row: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("reference oracle found no interior feasible point: {0}")]
    OracleInfeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(context: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!(
            "{context}: entry {i} is not finite ({})",
            values[i]
        ))),
        None => Ok(()),
    }
}
