use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum TwinSvmError {
    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Inputs that are well-formed but violate a precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// The dual solver was handed a problem it cannot work on.
    #[error("solver error: {0}")]
    Solver(String),

    /// A dual did not reach the stopping tolerance within its iteration cap.
    #[error("{problem} did not converge after {iterations} iterations (best remaining decrease {residual:e})")]
    NotConverged {
        problem: String,
        iterations: usize,
        residual: f64,
    },

    /// A factorization failed or produced non-finite coefficients.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Model file does not look like a model file.
    #[error("model format error: {0}")]
    Format(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),

    /// Model file is recognizable but its contents are inconsistent or truncated.
    #[error("corrupt model file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    /// Another error, annotated with what was being done.
    #[error("{context}: {source}")]
    Context {
        context: String,
        source: Box<TwinSvmError>,
    },
}

impl TwinSvmError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        TwinSvmError::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        TwinSvmError::Numerical(msg.into())
    }

    /// True for errors that originate in the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            TwinSvmError::Solver(_) | TwinSvmError::NotConverged { .. } | TwinSvmError::Numerical(_) => true,
            TwinSvmError::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        TwinSvmError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = TwinSvmError> = std::result::Result<T, E>;
