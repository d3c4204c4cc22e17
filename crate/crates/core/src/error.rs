use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph loading, sampling, selection and the oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex {vertex} has a negative incoming weight")]
    NegativeWeight { vertex: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("seed budget k = {k} exceeds the vertex count n = {n}")]
    KExceedsN { k: usize, n: usize },

    #[error(
        "exact enumeration needs {required} outcomes, above the limit of {limit}; use Monte-Carlo estimation instead"
    )]
    EnumerationTooLarge { required: u128, limit: u128 },

    #[error("out of memory after generating {generated} RRR sets")]
    OutOfMemory { generated: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
