use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::client::{ChatBackend, ChatRequest, LlmClientConfig, TransportError};
use super::{ChatMessage, LlmError};

#[derive(Serialize)]
struct Body<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct Reply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Content,
}

#[derive(Deserialize)]
struct Content {
    content: Option<String>,
}

/// Chat-completions over HTTP: `POST {model, messages, temperature, max_tokens}`
/// answered by `{choices: [{message: {content}}]}`.
pub struct HttpChatBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpChatBackend {
    pub fn new(config: &LlmClientConfig) -> Result<Self, LlmError> {
        config.validate_remote()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(Self {
            endpoint: config.endpoint.clone().unwrap_or_default(),
            api_key: config.api_key.clone(),
            client,
        })
    }
}

impl ChatBackend for HttpChatBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let body = Body {
            model: request.model,
            messages: request.messages,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            seed: request.seed,
        };
        let mut builder = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout(e.to_string())
            } else {
                TransportError::Transient(e.to_string())
            }
        })?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(TransportError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let detail = response.text().unwrap_or_default();
            return Err(TransportError::Fatal(format!(
                "HTTP {status}: {}",
                detail.trim()
            )));
        }
        let reply: Reply = response
            .json()
            .map_err(|e| TransportError::Fatal(format!("malformed completion response: {e}")))?;
        reply
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| TransportError::Fatal("completion response has no content".into()))
    }
}
