use std::path::Path;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid mesh: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: header declares {expected} bytes of voxel data, file holds {actual}")]
    HeaderMismatch {
        path: String,
        expected: u64,
        actual: u64,
    },

    #[error("invalid bounding box: {0}")]
    InvalidBBox(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interpolation centers {first} and {second} coincide; the input mesh is degenerate")]
    DuplicateCenter { first: usize, second: usize },

    #[error(
        "interpolation matrix is singular: pivot {pivot:.3e} at row {row} is below \
         1e-12 x max|A| ({max_entry:.3e}); retry with a positive regularization (e.g. --lambda 1e-8)"
    )]
    SingularMatrix {
        row: usize,
        pivot: f64,
        max_entry: f64,
    },

    #[error("perturbation degenerates cell {cell} (measure {measure:.3e}); reduce the magnitude")]
    DegenerateResult { cell: usize, measure: f64 },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::DegenerateResult { .. }
        )
    }
}
