//! File formats, table regeneration and the `greenedge` command line on top
//! of `greenedge-core`.

pub mod cli;
pub mod compare;
pub mod data;
pub mod error;
pub mod sweep;
pub mod tables;

pub use error::{Error, Result};

/// Shipped data directory, used when neither `--data` nor `GREENEDGE_DATA`
/// is set.
pub const DEFAULT_DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
