use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use super::client::{ChatBackend, ChatRequest, TransportError};
use super::{ChatMessage, LlmError};

/// One scripted turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockReply {
    Reply(String),
    Fail(TransportError),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScriptEntry {
    Text(String),
    Reply {
        reply: String,
    },
    Error {
        error: String,
        message: Option<String>,
    },
}

/// Offline backend that answers from an ordered script and records every prompt.
///
/// A script file is a JSON array whose entries are either reply strings or
/// objects: `{"reply": "..."}` or `{"error": "transient" | "timeout" | "fatal"}`.
#[derive(Debug, Default)]
pub struct MockChatClient {
    script: Mutex<VecDeque<MockReply>>,
    prompts: Mutex<Vec<Vec<ChatMessage>>>,
}

impl MockChatClient {
    pub fn new(script: impl IntoIterator<Item = MockReply>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            prompts: Mutex::default(),
        }
    }

    pub fn from_replies<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(replies.into_iter().map(|r| MockReply::Reply(r.into())))
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let entries: Vec<ScriptEntry> = serde_json::from_str(text)
            .map_err(|e| LlmError::Config(format!("mock script: {e}")))?;
        let mut script = Vec::with_capacity(entries.len());
        for entry in entries {
            script.push(match entry {
                ScriptEntry::Text(t) | ScriptEntry::Reply { reply: t } => MockReply::Reply(t),
                ScriptEntry::Error { error, message } => {
                    let message = message.unwrap_or_else(|| format!("scripted {error} failure"));
                    MockReply::Fail(match error.as_str() {
                        "transient" => TransportError::Transient(message),
                        "timeout" => TransportError::Timeout(message),
                        "fatal" => TransportError::Fatal(message),
                        other => {
                            return Err(LlmError::Config(format!(
                                "mock script: unknown error kind `{other}`"
                            )))
                        }
                    })
                }
            });
        }
        Ok(Self::new(script))
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Every message list received so far, in call order.
    pub fn prompts(&self) -> Vec<Vec<ChatMessage>> {
        self.prompts
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn calls(&self) -> usize {
        self.prompts.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl ChatBackend for MockChatClient {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        self.prompts
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(request.messages.to_vec());
        match self
            .script
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .pop_front()
        {
            Some(MockReply::Reply(text)) => Ok(text),
            Some(MockReply::Fail(e)) => Err(e),
            None => Err(TransportError::Fatal("mock script exhausted".into())),
        }
    }
}
