//! Estimation of connected induced subgraph (CIS) class concentrations in
//! large labeled graphs via random walks over the implicit CIS relationship
//! graph, with exact enumeration for ground truth, baseline samplers,
//! degree-preserving null models, and a reproducible experiment driver.
//!
//! The walkers never materialize the relationship graph: each step queries
//! only the nodes of the current subgraph through a crawl-style oracle that
//! accounts for distinct queried nodes and simulated latency.
//!
//! With the default `parallel` feature, independent runs, enumeration roots,
//! and null-model graphs are distributed over a rayon pool; disabling the
//! feature yields a fully sequential build with identical outputs.

pub mod canon;
pub mod cis;
pub mod estimate;
pub mod exact;
pub mod experiment;
pub mod fixtures;
pub mod graph;
pub mod neighborhood;
pub mod nullmodel;
pub mod oracle;
pub mod par;
pub mod walk;

pub use canon::{CanonicalCode, ClassId, ClassRegistry};
pub use cis::{induced_cis, Cis, CisKey};
pub use estimate::{ConcentrationVector, ErrorReport};
pub use graph::{EdgeLabel, GraphMode, LabeledGraph, NodeId};
pub use oracle::{LatencyModel, QueryBudget, QueryOracle};

use graph::NodeId as NId;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty graph")]
    EmptyGraph,
    #[error("node id {0} out of range")]
    NodeOutOfRange(NId),
    #[error("duplicate node in node set")]
    DuplicateNodes,
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("subgraph size {size} unsupported here (max {max})")]
    SizeUnsupported { size: usize, max: usize },
    #[error("canonical code absent from registry (k={k}); registry/mode mismatch")]
    UnknownClass { k: usize },
    #[error("materialization guard exceeded: {count} subgraphs > {guard}")]
    GuardExceeded { count: u64, guard: u64 },
    #[error("graph too small: need {need} nodes, have {have}")]
    GraphTooSmall { need: usize, have: usize },
    #[error("empty trace")]
    EmptyTrace,
    #[error("stub wiring failed after {0} restarts")]
    WiringFailed(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
