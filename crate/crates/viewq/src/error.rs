use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: invalid `{key}`: {message}")]
    Schema {
        path: PathBuf,
        key: String,
        message: String,
    },
    #[error("invalid record: `{key}`: {message}")]
    InvalidRecord { key: String, message: String },
    #[error("{path}: {source}")]
    Mesh {
        path: PathBuf,
        #[source]
        source: viewq_core::Error,
    },
    #[error(transparent)]
    Core(#[from] viewq_core::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
        move |source| Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Short machine-readable category, used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Schema { .. } => "schema",
            Error::InvalidRecord { .. } => "invalid_record",
            Error::Mesh { .. } => "mesh",
            Error::Core(_) => "core",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ThreadPool(_) => "thread_pool",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
