use std::collections::BTreeMap;

use serde_json::Value;

use super::json::{complete_with_retry, extract_json};
use super::{prompts, ChatMessage, LlmClient, LlmError};
use crate::xml::{
    extract_strings, reinsert_strings_with, BpmnDocument, ExtractOptions, DEFAULT_FUZZY_THRESHOLD,
};

#[derive(Debug, Clone)]
pub struct TranslateOptions {
    pub target_language: String,
    pub threshold: f64,
    pub extract: ExtractOptions,
    pub max_retries: u32,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        Self {
            target_language: "English".to_owned(),
            threshold: DEFAULT_FUZZY_THRESHOLD,
            extract: ExtractOptions::default(),
            max_retries: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub document: BpmnDocument,
    /// Source string to translation, as returned by the model.
    pub mapping: BTreeMap<String, String>,
    pub replaced: usize,
    pub warnings: Vec<String>,
    pub llm_calls: u32,
}

fn parse_mapping(raw: &str) -> Result<BTreeMap<String, String>, String> {
    let Value::Object(o) = extract_json(raw)? else {
        return Err("expected a JSON object mapping source strings to translations".into());
    };
    o.into_iter()
        .map(|(k, v)| match v {
            Value::String(s) => Ok((k, s)),
            other => Err(format!(
                "translation of {k:?} must be a string, got {other}"
            )),
        })
        .collect()
}

/// Extracts unique strings, translates them in a single request and writes
/// the translations back. Identifiers are never touched.
pub fn translate_model(
    doc: &BpmnDocument,
    llm: &LlmClient,
    opts: &TranslateOptions,
) -> Result<Translation, LlmError> {
    let strings = extract_strings(doc, &opts.extract);
    if strings.is_empty() {
        return Ok(Translation {
            document: doc.clone(),
            mapping: BTreeMap::new(),
            replaced: 0,
            warnings: opts.extract.warnings(),
            llm_calls: 0,
        });
    }
    let sources: Vec<&str> = strings.iter().map(|s| s.value.as_str()).collect();
    let messages = [
        ChatMessage::system(prompts::translation_system(&opts.target_language)),
        ChatMessage::user(serde_json::to_string_pretty(&sources).expect("strings serialize")),
    ];
    let parsed = complete_with_retry(&messages, llm, opts.max_retries, None, parse_mapping)?;
    let reinserted = reinsert_strings_with(doc, &parsed.value, opts.threshold, &opts.extract);
    Ok(Translation {
        document: reinserted.document,
        mapping: parsed.value,
        replaced: reinserted.replaced,
        warnings: reinserted.warnings,
        llm_calls: parsed.attempts,
    })
}
