use thiserror::Error;

/// Failures surfaced to the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A value that could not be read, with where it came from.
    #[error("{origin}: `{key}`: {message}")]
    Config {
        origin: String,
        key: String,
        message: String,
    },

    #[error("missing required field `{0}`")]
    Missing(&'static str),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] lmg_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for bad input, 2 when a numerical method failed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
