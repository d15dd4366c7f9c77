use std::path::PathBuf;

/// Failures of a command, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] gigmix::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use gigmix::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } => 3,
            CliError::Io { .. } | CliError::Core(E::Io { .. }) => 4,
            CliError::Core(E::Numerical(_) | E::Initialization(_) | E::NonNormalizable(_)) => 5,
            CliError::Core(_) => 3,
        }
    }
}
