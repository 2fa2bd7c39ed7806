use thiserror::Error;

use crate::contraction::cost::CostReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A contraction or allocation was refused before it started.
    #[error("memory budget exceeded: need {} bytes, budget {budget_bytes} bytes ({})", report.space_bytes, report.human_space())]
    BudgetExceeded {
        report: Box<CostReport>,
        budget_bytes: u64,
    },

    #[error("tensor of {elements} elements exceeds the guard of {limit} elements")]
    ElementGuard { elements: u128, limit: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{n_qubits} qubits exceed the state-vector limit of {limit}")]
    OracleLimit { n_qubits: usize, limit: usize },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
