use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// A price cell that could not be turned into a log-return.
#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub row: usize,
    pub column: usize,
    pub open: f64,
    pub close: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{routine} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// An internal consistency check failed; the value would not be trustworthy.
    #[error("numerical breakdown in {routine}: {detail}")]
    Numerical { routine: &'static str, detail: String },

    #[error("at x = {x}: {source}")]
    AtPoint { x: f64, source: Box<Error> },

    #[error("replica {index}: {source}")]
    Replica { index: usize, source: Box<Error> },

    #[error("column `{ticker}` has zero variance")]
    ZeroVariance { ticker: String },

    #[error("{} nonpositive price cell(s), first at row {} column {}", .0.len(), .0[0].row, .0[0].column)]
    InvalidPrices(Vec<CellError>),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            routine,
            detail: detail.into(),
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::Numerical { .. } => true,
            Error::AtPoint { source, .. } | Error::Replica { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
