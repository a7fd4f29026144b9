use std::path::PathBuf;

use greenedge_core::{FabError, GridError, OperationalError, TradeoffError, UsageError, WorkloadError};

/// Process exit codes, also listed in `--help`.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const LOAD: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const INCOMPATIBLE: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("unknown {kind} `{name}`; known: {}", known.join(", "))]
    Unknown { kind: &'static str, name: String, known: Vec<String> },
    #[error("{0}")]
    Usage(String),
    #[error("{0}; pass --allow-cross-study to compare anyway")]
    CrossStudy(TradeoffError),
    #[error(transparent)]
    Tradeoff(TradeoffError),
    #[error(transparent)]
    Fab(#[from] FabError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Operational(#[from] OperationalError),
    #[error(transparent)]
    UsageModel(#[from] UsageError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

impl From<TradeoffError> for Error {
    fn from(e: TradeoffError) -> Self {
        match e {
            TradeoffError::CrossStudy { .. } => Error::CrossStudy(e),
            other => Error::Tradeoff(other),
        }
    }
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Write { .. } => exit::IO,
            Error::Read { .. } | Error::Parse { .. } | Error::Invalid { .. } => exit::LOAD,
            Error::CrossStudy(_) => exit::INCOMPATIBLE,
            _ => exit::VALIDATION,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
