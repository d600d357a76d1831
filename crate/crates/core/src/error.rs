use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-energy input, normalization undefined")]
    ZeroEnergy,

    #[error("source at {distance_m} m lies inside the head sphere (radius {radius_m} m)")]
    SourceInsideHead { distance_m: f64, radius_m: f64 },

    #[error("jittered position collapsed onto the origin ({distance_m} m)")]
    DegeneratePosition { distance_m: f64 },

    #[error("insufficient decay range: {0}")]
    InsufficientDecay(String),

    #[error("degenerate envelope: {0}")]
    DegenerateEnvelope(String),

    #[error("rank-deficient design matrix")]
    RankDeficient,

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("{file}: {message}")]
    Schema { file: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 3 for numeric failures, 2 for
    /// everything caused by bad input or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ZeroEnergy
            | Error::DegeneratePosition { .. }
            | Error::InsufficientDecay(_)
            | Error::DegenerateEnvelope(_)
            | Error::RankDeficient => 3,
            _ => 2,
        }
    }
}
