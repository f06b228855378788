use std::path::{Path, PathBuf};

/// Every failure the tool can report, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("data format error: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("property verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// 2 config, 3 data format or file access, 4 numeric, 5 verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Format(_) | Error::Io { .. } => 3,
            Error::Numeric(_) => 4,
            Error::Verification(_) => 5,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<gfk_core::train::TrainError> for Error {
    fn from(e: gfk_core::train::TrainError) -> Self {
        use gfk_core::train::TrainError as T;
        match e {
            T::Domain(_) | T::Contract(_) => Error::Config(e.to_string()),
            _ => Error::Numeric(e.to_string()),
        }
    }
}

impl From<gfk_core::gan::GanError> for Error {
    fn from(e: gfk_core::gan::GanError) -> Self {
        use gfk_core::gan::GanError as G;
        match e {
            G::NonFinite { .. } => Error::Numeric(e.to_string()),
            _ => Error::Config(e.to_string()),
        }
    }
}

impl From<gfk_core::synth::SynthError> for Error {
    fn from(e: gfk_core::synth::SynthError) -> Self {
        use gfk_core::synth::SynthError as S;
        match e {
            S::Singular { .. } => Error::Numeric(e.to_string()),
            _ => Error::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
