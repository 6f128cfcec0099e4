use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ringid_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("format error: {0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 2 for usage and configuration problems, 3 for I/O and file formats.
    pub fn exit_code(&self) -> i32 {
        use ringid_core::Error as C;
        match self {
            Error::Usage(_) => 2,
            Error::Io { .. } | Error::Format(_) => 3,
            Error::Core(C::Dimension(_) | C::LengthMismatch { .. } | C::SupportMismatch { .. }) => 3,
            Error::Core(_) => 2,
        }
    }
}
