use std::path::PathBuf;

/// Errors raised by the library. Each variant maps to one failure class of the
/// public operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid mesh: {0}")]
    MeshInvalid(String),
    #[error("mesh tangled: {0}")]
    MeshTangled(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("conflicting boundary values on dof {dof}: {first} vs {second}")]
    BcConflict { dof: usize, first: f64, second: f64 },
    #[error("singular matrix (pivot {pivot})")]
    SingularMatrix { pivot: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
