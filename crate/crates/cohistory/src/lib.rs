//! File formats, dump ingest and the staged pipeline around `cohistory-core`.

pub mod config;
pub mod error;
pub mod export;
pub mod formats;
pub mod ingest;

pub use error::{PipelineError, Result};
pub mod parallel;
pub mod pipeline;
pub mod verify;
