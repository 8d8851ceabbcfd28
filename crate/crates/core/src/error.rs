use std::fmt;
use std::path::PathBuf;

/// Errors raised while ingesting inputs or validating configuration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    Encoding { path: PathBuf, offset: usize },

    #[error("line count mismatch: {}", LineCounts(.0))]
    LineCountMismatch(Vec<(PathBuf, usize)>),

    #[error("{}: candidate file is empty", path.display())]
    EmptyCandidate { path: PathBuf },

    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("engine '{engine}': {source}")]
    Engine {
        engine: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True when the error comes from bad arguments rather than bad input data.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidArgument(_) => true,
            Error::Engine { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}

struct LineCounts<'a>(&'a [(PathBuf, usize)]);

impl fmt::Display for LineCounts<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (path, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} has {} lines", path.display(), n)?;
        }
        Ok(())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
