use thiserror::Error;

use crate::sdp::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e}, trace {trace:e})")]
    NotPsd { min_eig: f64, trace: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The IU channel matrix lost rank, so the null-space dimensions changed.
    #[error("degenerate channel: detected rank {detected} where {expected} was required")]
    DegenerateChannel { detected: usize, expected: usize },

    /// Rate targets cannot be met within the power budget. `shortfall[i]` is the
    /// rate deficit of IU `i` in bits/s/Hz (0 where the target is met).
    #[error("rate targets infeasible within the power budget (shortfall {shortfall:?})")]
    Infeasible { shortfall: Vec<f64> },

    #[error("residual power budget {residual:e} W is not positive")]
    InfeasibleBudget { residual: f64 },

    #[error("rank-one repair exceeded the power budget (rank defects {rank_defects:?})")]
    RankOneRepair { rank_defects: Vec<f64> },

    #[error("SDP solver stopped with status {status:?} after {iterations} iterations")]
    Solver { status: SolveStatus, iterations: usize },
}
