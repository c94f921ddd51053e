use thiserror::Error;

/// Errors raised by the solvers, constructions and I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A payoff law has an infinite or undefined partial expectation.
    #[error("payoff law is not integrable: {0}")]
    NonIntegrable(String),

    /// A fixed-point iteration ran out of iterations.
    #[error("no convergence after {iterations} iterations (last sup-norm gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    /// A construction or computation produced an unusable numerical result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Coarse class used by the command line: `validation`, `numerical` or `io`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) | Error::NonIntegrable(_) | Error::Json(_) => "validation",
            Error::NoConvergence { .. } | Error::Numerical(_) => "numerical",
            Error::Io { .. } | Error::Csv(_) => "io",
        }
    }

    /// Process exit code: 2 validation, 3 numerical, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "validation" => 2,
            "numerical" => 3,
            _ => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
