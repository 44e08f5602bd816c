use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON, with the position reported by the parser.
    #[error("{}:{line}:{column}: {detail}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        detail: String,
    },

    /// Well-formed input that fails validation.
    #[error("{}: {detail}", path.display())]
    Invalid { path: PathBuf, detail: String },

    #[error("unknown example '{0}' (expected example1, example2, example3 or example4)")]
    UnknownExample(String),

    #[error("invalid option: {0}")]
    Option(pdflow::Error),

    #[error("{source}; current --dt is {dt}")]
    Divergence { dt: f64, source: pdflow::Error },
}

impl CliError {
    /// 2 for bad input, 3 for divergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Divergence { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn invalid(path: impl Into<PathBuf>, detail: impl ToString) -> Self {
        CliError::Invalid {
            path: path.into(),
            detail: detail.to_string(),
        }
    }

    /// Sorts a library error from a run into divergence or bad options.
    pub(crate) fn from_run(err: pdflow::Error, dt: f64) -> Self {
        match err {
            pdflow::Error::Divergence { .. } | pdflow::Error::NodeDivergence { .. } => {
                CliError::Divergence { dt, source: err }
            }
            other => CliError::Option(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
