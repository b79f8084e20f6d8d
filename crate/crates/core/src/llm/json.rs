use serde_json::Value;

use super::schema::{validate_stage, Stage};
use super::{ChatMessage, LlmClient, LlmError};

/// Contents of fenced code blocks (```lang ... ```), in order.
fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                blocks.push(&body[..close]);
                rest = &body[close + 3..];
            }
            None => {
                blocks.push(body);
                break;
            }
        }
    }
    blocks
}

fn first_value(text: &str) -> Option<Value> {
    for (i, c) in text.char_indices() {
        if c != '{' && c != '[' {
            continue;
        }
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        if let Some(Ok(v)) = stream.next() {
            return Some(v);
        }
    }
    None
}

/// Finds the first JSON object or array in `text`, preferring fenced blocks
/// and tolerating surrounding prose.
pub fn extract_json(text: &str) -> Result<Value, String> {
    fenced_blocks(text)
        .into_iter()
        .find_map(first_value)
        .or_else(|| first_value(text))
        .ok_or_else(|| "response contains no JSON object or array".to_owned())
}

/// Cuts a BPMN document out of `text`: a fenced block if present, otherwise
/// everything from the XML declaration (or the first `definitions` tag) to
/// the last `>`.
pub fn extract_xml(text: &str) -> Result<String, String> {
    let candidate = fenced_blocks(text)
        .into_iter()
        .find(|b| b.contains("definitions"))
        .unwrap_or(text);
    let start = candidate
        .find("<?xml")
        .or_else(|| {
            candidate
                .find("definitions")
                .and_then(|i| candidate[..i].rfind('<'))
        })
        .ok_or_else(|| "response contains no BPMN definitions element".to_owned())?;
    let end = candidate
        .rfind('>')
        .filter(|&e| e > start)
        .ok_or_else(|| "response contains no complete XML document".to_owned())?;
    Ok(candidate[start..=end].to_owned())
}

/// A successfully parsed reply and how many responses it took.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub raw: String,
    pub attempts: u32,
}

/// Parses `first_response`; on failure re-prompts with the error appended,
/// up to `max_retries` more times. `messages` is the conversation that
/// produced `first_response`.
pub fn retry_parse<T>(
    first_response: String,
    messages: &[ChatMessage],
    llm: &LlmClient,
    max_retries: u32,
    stage: Option<Stage>,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Parsed<T>, LlmError> {
    let mut raw = first_response;
    let mut attempt = 1;
    loop {
        match parse(&raw) {
            Ok(value) => {
                return Ok(Parsed {
                    value,
                    raw,
                    attempts: attempt,
                })
            }
            Err(error) if attempt > max_retries => {
                return Err(LlmError::SchemaFailureAfterRetries {
                    stage,
                    attempts: attempt,
                    last_error: error,
                    raw,
                })
            }
            Err(error) => {
                let mut retry = messages.to_vec();
                retry.push(ChatMessage::assistant(if raw.trim().is_empty() {
                    "(empty)"
                } else {
                    raw.as_str()
                }));
                retry.push(ChatMessage::user(format!(
                    "Your previous answer could not be used: {error}\nReply again with only the corrected output."
                )));
                raw = llm.complete(&retry)?;
                attempt += 1;
            }
        }
    }
}

/// Sends `messages`, then parses the reply with retries.
pub fn complete_with_retry<T>(
    messages: &[ChatMessage],
    llm: &LlmClient,
    max_retries: u32,
    stage: Option<Stage>,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Parsed<T>, LlmError> {
    let first = llm.complete(messages)?;
    retry_parse(first, messages, llm, max_retries, stage, parse)
}

/// Extracts JSON from `response` and validates it against `schema` (when
/// given), re-prompting on failure.
pub fn parse_json_with_retry(
    response: String,
    schema: Option<Stage>,
    llm: &LlmClient,
    messages: &[ChatMessage],
    max_retries: u32,
) -> Result<Parsed<Value>, LlmError> {
    retry_parse(response, messages, llm, max_retries, schema, |raw| {
        let value = extract_json(raw)?;
        match schema {
            Some(stage) => validate_stage(stage, value),
            None => Ok(value),
        }
    })
}
