//! Parallel influence maximization with the IMM algorithm.
//!
//! The crate samples random reverse-reachable sets over a weighted directed
//! graph and greedily picks the `k` vertices that cover the most sets. See
//! [`imm::run_imm`] for the entry point.

pub mod cli;
pub mod error;
pub mod graph;
pub mod imm;
pub mod oracle;
pub mod pool;
pub mod sampling;
pub mod selection;

pub use error::{Error, Result};
pub use graph::{DiffusionModel, Graph, VertexId};
pub use imm::{run_imm, ImmConfig, ImmResult, Strategy};
pub use pool::WorkPool;
