//! LLM-driven stages: translation, closed-loop correction, description
//! generation and six-stage reconstruction from text.
//!
//! Everything goes through [`LlmClient`], which wraps a pluggable
//! [`ChatBackend`] (HTTP or scripted mock) with retries and a shared rate
//! limit.

mod client;
mod correct;
mod describe;
mod http;
mod json;
mod mock;
mod prompts;
mod reconstruct;
mod schema;
mod translate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{
    ChatBackend, ChatRequest, LlmClient, LlmClientConfig, RateLimiter, TransportError,
    ENV_LLM_API_KEY, ENV_LLM_ENDPOINT, ENV_LLM_MODEL,
};
pub use correct::{
    apply_repair_actions, correct_model, CorrectionLogEntry, CorrectionMode, CorrectionOutcome,
    CorrectionState, Exchange, RepairAction, RepairKind,
};
pub use describe::generate_description;
pub use http::HttpChatBackend;
pub use json::{
    complete_with_retry, extract_json, extract_xml, parse_json_with_retry, retry_parse, Parsed,
};
pub use mock::{MockChatClient, MockReply};
pub use reconstruct::{
    reconstruct, write_run_dir, ReconstructOptions, Reconstruction, StageArtifact,
};
pub use schema::{validate_stage, Stage};
pub use translate::{translate_model, TranslateOptions, Translation};

use crate::compliance::ComplianceReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("LLM unavailable after {attempts} attempt(s): {message}")]
    LlmUnavailable { attempts: u32, message: String },
    #[error("LLM timed out after {attempts} attempt(s)")]
    LlmTimeout { attempts: u32 },
    #[error("invalid chat request: {0}")]
    InvalidMessages(String),
    #[error("{} output still invalid after {attempts} attempt(s): {last_error}", stage.map(|s| s.name()).unwrap_or("LLM"))]
    SchemaFailureAfterRetries {
        stage: Option<Stage>,
        attempts: u32,
        last_error: String,
        raw: String,
    },
    #[error("reconstructed model is still non-compliant ({} error(s)) after correction", .0.report.error_count())]
    ReconstructionNonCompliant(Box<Reconstruction>),
    #[error("invalid LLM configuration: {0}")]
    Config(String),
    #[error("cannot process model: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LlmError {
    /// Report of a failed reconstruction, when this is one.
    pub fn report(&self) -> Option<&ComplianceReport> {
        match self {
            Self::ReconstructionNonCompliant(r) => Some(&r.report),
            _ => None,
        }
    }
}
