//! Support code for the `entroinv` binary.

pub mod io;
pub mod verify;

use crate::error::Error;
use crate::solver::SolveStatus;

/// Process exit code for a solver status.
pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::InfeasibleDatum => 2,
        SolveStatus::RankDeficient => 3,
        SolveStatus::IterationLimit => 4,
    }
}

/// Process exit code for an error.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::InfeasibleDatum(_) | Error::MarginalMismatch { .. } | Error::BandViolation { .. } => 2,
        Error::RankDeficient { .. } => 3,
        Error::NotConverged(_) => 4,
        _ => 1,
    }
}
