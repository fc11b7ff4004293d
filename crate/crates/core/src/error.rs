use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is numerically zero (largest eigenvalue {max_eigenvalue:e})")]
    ZeroMatrix { max_eigenvalue: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("rule `{0}` is not linear in the noun argument")]
    NotLinearRule(&'static str),

    #[error("rule `{0}` has no structural Kraus realization")]
    NotStructural(&'static str),

    #[error("{}", format_location(.source_name, *.line, .message))]
    Format {
        source_name: String,
        line: Option<usize>,
        message: String,
    },

    #[error("no embedding vector for `{0}` or any of its hyponyms")]
    MissingVector(String),

    #[error("word `{0}` is not in the matrix store")]
    MissingWord(String),

    #[error("labels must contain both classes ({positives} positive, {negatives} negative)")]
    DegenerateLabels { positives: usize, negatives: usize },

    #[error("unknown composition rule `{given}`; valid ids: {valid}")]
    UnknownRule { given: String, valid: String },

    #[error("unknown measure `{given}`; valid ids: ke, kba, crisp")]
    UnknownMeasure { given: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn format_location(source_name: &str, line: Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("{source_name}:{line}: {message}"),
        None => format!("{source_name}: {message}"),
    }
}

impl Error {
    pub(crate) fn format(source_name: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
