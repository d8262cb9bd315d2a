use qubo_dem::Error as CoreError;

pub type Result<T> = std::result::Result<T, BenchError>;

/// Harness failures, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad flags, unknown methods, out-of-range parameters.
    #[error("usage: {0}")]
    Usage(String),
    /// Unreadable or malformed instance, config or output files.
    #[error("input: {0}")]
    Input(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Input(_) => 3,
            BenchError::Solver(_) => 4,
        }
    }
}

impl From<CoreError> for BenchError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidArgument(_) => BenchError::Usage(msg),
            CoreError::Format(_)
            | CoreError::InvalidEntry { .. }
            | CoreError::WrongConvention { .. }
            | CoreError::DimensionMismatch { .. } => BenchError::Input(msg),
            CoreError::NotNormalized { .. }
            | CoreError::NotTangent { .. }
            | CoreError::NotConverged { .. }
            | CoreError::AtIteration { .. } => BenchError::Solver(msg),
        }
    }
}

impl From<qubo_dem::FormatError> for BenchError {
    fn from(e: qubo_dem::FormatError) -> Self {
        BenchError::Input(e.to_string())
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Input(e.to_string())
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for BenchError {
    fn from(e: serde_json::Error) -> Self {
        BenchError::Input(e.to_string())
    }
}
