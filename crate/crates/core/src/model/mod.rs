//! Element taxonomy and the graph view of a process model.

mod graph;
mod stats;
mod taxonomy;

use thiserror::Error;

pub use graph::{build_graph, BpmnEdge, BpmnGraph, BpmnNode, GraphBuild, ATTACHMENT_TAG};
pub use stats::{context_label, graph_stats, GraphStats};
pub use taxonomy::{categorize_element, ElementCategory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("document contains no process definition")]
    DocumentWithoutProcess,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("node id must not be empty")]
    EmptyNodeId,
    #[error("edge `{edge}` references missing node `{endpoint}`")]
    DanglingEdge { edge: String, endpoint: String },
}
