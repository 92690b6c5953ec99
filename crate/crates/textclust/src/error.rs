use std::path::PathBuf;

use textclust_core::oracle::OracleError;
use textclust_core::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error(transparent)]
    Core(#[from] textclust_core::Error),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 validation, 2 transport, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Transport(_) => 2,
            Error::Core(e) if e.kind() == ErrorKind::Numerical => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

impl From<OracleError> for Error {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Transport(m) => Error::Transport(m),
            OracleError::Config(m) => Error::Config(m),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
        assert_eq!(Error::Transport("x".into()).exit_code(), 2);
        assert_eq!(Error::Core(textclust_core::Error::Numerical("x".into())).exit_code(), 3);
        assert_eq!(Error::Core(textclust_core::Error::EmptyCorpus).exit_code(), 1);
        let staged = Error::Transport("down".into()).in_stage("query");
        assert_eq!(staged.exit_code(), 2);
        assert_eq!(staged.to_string(), "query stage failed: transport error: down");
    }
}
