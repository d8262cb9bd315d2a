use std::fmt;

use crate::instance::Convention;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry {index} = {value} is outside the {convention} alphabet")]
    InvalidEntry {
        index: usize,
        value: f64,
        convention: Convention,
    },

    #[error("expected a {expected} instance, found {found}")]
    WrongConvention {
        expected: Convention,
        found: Convention,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {row} of the factor matrix has norm {norm}, expected 1")]
    NotNormalized { row: usize, norm: f64 },

    #[error("direction is not tangent at row {row}: <f_i, d_i> = {inner:e}")]
    NotTangent { row: usize, inner: f64 },

    #[error("direction solver stopped after {iterations} iterations with duality gap {gap:e}")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Errors raised while reading the instance text format.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },

    #[error("line {line}: malformed entry: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: index {index} out of range for n = {n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },

    #[error("line {line}: entry ({i}, {j}) contradicts a previously declared symmetric value")]
    Asymmetric { line: usize, i: usize, j: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
