use std::path::PathBuf;

use thiserror::Error;

use crate::media::png::PngError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("{file}: {source}")]
    Image {
        file: String,
        #[source]
        source: PngError,
    },

    #[error("CQI 0 is not schedulable")]
    Unschedulable,

    #[error("allocation invariant violated: {0}")]
    Allocation(String),

    #[error("embedding provider: {0}")]
    Provider(String),

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("empty image")]
    EmptyImage,

    #[error("empty {0} list")]
    EmptyBatch(&'static str),

    #[error("episode seed={seed} delta_dapp={delta_dapp}: {source}")]
    Episode {
        seed: u64,
        delta_dapp: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.to_string(), reason: reason.into() }
    }
}
