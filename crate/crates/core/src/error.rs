use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("missing hour {timestamp} for site {site_id}")]
    MissingHour { site_id: String, timestamp: String },

    #[error("negative power {value} at row {row}")]
    NegativePower { row: u64, value: f64 },

    #[error("power {value} MW at row {row} exceeds capacity {capacity} MW by more than 1%")]
    OverCapacity { row: u64, value: f64, capacity: f64 },

    #[error("unknown generation type label {0:?}")]
    UnknownType(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("stale forward cache: {0}")]
    StaleCache(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {loss_name} = {value}")]
    Diverged {
        epoch: usize,
        batch: usize,
        loss_name: &'static str,
        value: f64,
    },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("unsupported checkpoint schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("infeasible target for {site_id} {year}: {reason}")]
    Infeasible {
        site_id: String,
        year: i32,
        reason: String,
    },

    #[error("constant series")]
    ConstantSeries,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
