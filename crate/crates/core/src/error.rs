use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("affiliation table is empty: no value reaches the occurrence threshold")]
    EmptyTable,
    #[error("network has no edges")]
    EmptyNetwork,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cut size {k} out of range 1..={leaves}")]
    CutOutOfRange { k: usize, leaves: usize },
    #[error("unknown cluster id {0}")]
    UnknownCluster(u32),
    #[error("partition ensemble is empty")]
    EmptyEnsemble,
}

pub type Result<T> = core::result::Result<T, Error>;
