use thiserror::Error;

/// Errors raised by the rules and checkers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact search would exceed one of the configured caps.
    #[error("resource limit exceeded: {what} is {actual}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        actual: u64,
        cap: u64,
    },

    /// No (k, l)-Voronoi partition exists for any l.
    #[error("no admissible partition of the proposed projects")]
    NoPartition,

    /// A scenario document that cannot be read.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A distance table that is not a metric.
    #[error("metric violation: {0}")]
    Metric(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn check_cap(what: &'static str, actual: u64, cap: u64) -> Result<()> {
        if actual > cap {
            Err(Error::ResourceLimit { what, actual, cap })
        } else {
            Ok(())
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
