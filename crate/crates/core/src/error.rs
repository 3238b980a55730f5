use thiserror::Error;

/// Errors raised across the simulator, estimators, optimizers and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    Index { index: usize, n_qubits: usize },
    #[error("binding error: {0}")]
    Binding(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user-supplied configuration rather than runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Size(_) | Error::Binding(_) | Error::Domain(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
