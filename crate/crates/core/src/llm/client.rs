use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{ChatMessage, LlmError, Role};

pub const ENV_LLM_ENDPOINT: &str = "BPMNKIT_LLM_ENDPOINT";
pub const ENV_LLM_MODEL: &str = "BPMNKIT_LLM_MODEL";
pub const ENV_LLM_API_KEY: &str = "BPMNKIT_LLM_API_KEY";

/// Failure reported by a backend for a single request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// Worth retrying: connection reset, HTTP 429 or 5xx.
    Transient(String),
    Timeout(String),
    /// Not worth retrying: bad credentials, malformed response, exhausted script.
    Fatal(String),
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Transient(m) => write!(f, "transient failure: {m}"),
            Self::Timeout(m) => write!(f, "timeout: {m}"),
            Self::Fatal(m) => write!(f, "{m}"),
        }
    }
}

pub struct ChatRequest<'a> {
    pub model: &'a str,
    pub messages: &'a [ChatMessage],
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: Option<u64>,
}

/// One chat-completion round trip. Implementations must be thread-safe.
pub trait ChatBackend: Send + Sync {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmClientConfig {
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
    pub retry_count: u32,
    pub retry_delay_ms: u64,
    /// Requests per minute shared by every clone of a client; `None` is unlimited.
    pub rate_limit: Option<u32>,
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            model: "gpt-4o-mini".to_owned(),
            temperature: 0.0,
            max_tokens: 4096,
            timeout_ms: 120_000,
            retry_count: 3,
            retry_delay_ms: 500,
            rate_limit: None,
            seed: None,
            api_key: None,
        }
    }
}

impl LlmClientConfig {
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup(ENV_LLM_ENDPOINT).filter(|s| !s.is_empty()) {
            self.endpoint = Some(v);
        }
        if let Some(v) = lookup(ENV_LLM_MODEL).filter(|s| !s.is_empty()) {
            self.model = v;
        }
        if let Some(v) = lookup(ENV_LLM_API_KEY).filter(|s| !s.is_empty()) {
            self.api_key = Some(v);
        }
    }

    pub fn validate_remote(&self) -> Result<(), LlmError> {
        if self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(LlmError::Config("an LLM endpoint is required".into()));
        }
        if self.model.is_empty() {
            return Err(LlmError::Config(
                "an LLM model identifier is required".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(LlmError::Config("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// Spaces requests evenly at `per_minute` across all holders of the limiter.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(per_minute: Option<u32>) -> Self {
        let interval = match per_minute {
            Some(n) if n > 0 => Duration::from_secs(60) / n,
            _ => Duration::ZERO,
        };
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    /// Blocks until the caller may issue a request.
    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

/// Chat client with validation, exponential-backoff retries and rate limiting.
/// Clones share the backend and the limiter.
#[derive(Clone)]
pub struct LlmClient {
    backend: Arc<dyn ChatBackend>,
    config: LlmClientConfig,
    limiter: Arc<RateLimiter>,
}

impl LlmClient {
    pub fn new(backend: Arc<dyn ChatBackend>, config: LlmClientConfig) -> Self {
        let limiter = Arc::new(RateLimiter::new(config.rate_limit));
        Self {
            backend,
            config,
            limiter,
        }
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }

    /// Sends `messages` and returns the assistant text.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        match messages.first() {
            None => return Err(LlmError::InvalidMessages("no messages".into())),
            Some(m) if m.role != Role::System => {
                return Err(LlmError::InvalidMessages(
                    "first message must be a system message".into(),
                ))
            }
            _ => {}
        }
        if let Some(i) = messages.iter().position(|m| m.content.trim().is_empty()) {
            return Err(LlmError::InvalidMessages(format!("message {i} is empty")));
        }
        let request = ChatRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
            seed: self.config.seed,
        };
        let attempts = self.config.retry_count + 1;
        let mut last = TransportError::Transient(String::new());
        for attempt in 1..=attempts {
            if attempt > 1 {
                let factor = 2u32.saturating_pow(attempt - 2);
                thread::sleep(Duration::from_millis(self.config.retry_delay_ms) * factor);
            }
            self.limiter.acquire();
            match self.backend.chat(&request) {
                Ok(text) => return Ok(text),
                Err(TransportError::Fatal(message)) => {
                    return Err(LlmError::LlmUnavailable {
                        attempts: attempt,
                        message,
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(match last {
            TransportError::Timeout(_) => LlmError::LlmTimeout { attempts },
            other => LlmError::LlmUnavailable {
                attempts,
                message: other.to_string(),
            },
        })
    }
}
