use thiserror::Error;

/// CLI failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Schema(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Library(monotone_fourier::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 ok, 1 usage or schema, 2 capacity, 3 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Capacity(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Usage(_) | CliError::Schema(_) | CliError::Library(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<monotone_fourier::Error> for CliError {
    fn from(e: monotone_fourier::Error) -> Self {
        if e.is_capacity() {
            CliError::Capacity(e.to_string())
        } else if e.is_infeasible() {
            CliError::Infeasible(e.to_string())
        } else {
            CliError::Library(e)
        }
    }
}
