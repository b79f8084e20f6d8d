//! Toolkit for BPMN 2.0 process models: lossless XML handling, static
//! execution-compliance checks, an LLM-driven translate / correct /
//! describe / reconstruct pipeline, and a five-dimensional model
//! similarity score.

pub mod compliance;
pub mod embeddings;
pub mod llm;
pub mod model;
pub mod report;
pub mod similarity;
pub mod xml;
