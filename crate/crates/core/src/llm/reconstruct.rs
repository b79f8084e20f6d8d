use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::correct::{correct_model, CorrectionOutcome, CorrectionState};
use super::json::{complete_with_retry, extract_json, extract_xml};
use super::schema::{validate_stage, Stage};
use super::{prompts, ChatMessage, LlmClient, LlmError};
use crate::compliance::{validate, ComplianceReport};
use crate::xml::{self, auto_layout, reattach_di, serialize, strip_di, BpmnDocument};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageArtifact {
    pub stage: Stage,
    /// Validated JSON payload; for the XML stage, the document text as a JSON string.
    pub payload: Value,
    pub raw_response: String,
    /// Responses needed before the payload validated.
    pub attempts: u32,
}

#[derive(Debug, Clone)]
pub struct ReconstructOptions {
    pub max_retries: u32,
    pub correction_limit: usize,
    pub history_window: usize,
    pub simple_threshold: usize,
    /// Attach generated diagram interchange to a compliant result.
    pub layout: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        let c = CorrectionState::default();
        Self {
            max_retries: 3,
            correction_limit: c.limit,
            history_window: c.window,
            simple_threshold: c.simple_threshold,
            layout: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub document: BpmnDocument,
    pub artifacts: Vec<StageArtifact>,
    pub report: ComplianceReport,
    pub correction: Option<CorrectionOutcome>,
    /// Total chat completions issued, retries included.
    pub llm_calls: usize,
}

/// Runs the six stages on `description`. Each stage prompt carries the
/// validated payloads of all earlier stages. The generated model is
/// corrected when needed and laid out once compliant.
pub fn reconstruct(
    description: &str,
    llm: &LlmClient,
    opts: &ReconstructOptions,
) -> Result<Reconstruction, LlmError> {
    if description.trim().is_empty() {
        return Err(LlmError::InvalidMessages("description is empty".into()));
    }
    let mut artifacts: Vec<StageArtifact> = Vec::new();
    let mut previous: Vec<(Stage, String)> = Vec::new();
    let mut calls = 0usize;
    for stage in &Stage::ALL[..5] {
        let stage = *stage;
        let messages = [
            ChatMessage::system(prompts::stage_system(stage)),
            ChatMessage::user(prompts::stage_user(stage, description, &previous)),
        ];
        let parsed = complete_with_retry(&messages, llm, opts.max_retries, Some(stage), |raw| {
            validate_stage(stage, extract_json(raw)?)
        })?;
        calls += parsed.attempts as usize;
        previous.push((
            stage,
            serde_json::to_string_pretty(&parsed.value).expect("payload serializes"),
        ));
        artifacts.push(StageArtifact {
            stage,
            payload: parsed.value,
            raw_response: parsed.raw,
            attempts: parsed.attempts,
        });
    }

    let messages = [
        ChatMessage::system(prompts::stage_system(Stage::BpmnXml)),
        ChatMessage::user(prompts::stage_user(Stage::BpmnXml, description, &previous)),
    ];
    let parsed = complete_with_retry(
        &messages,
        llm,
        opts.max_retries,
        Some(Stage::BpmnXml),
        |raw| {
            let text = extract_xml(raw)?;
            let doc = xml::parse(text.as_bytes())
                .map_err(|e| format!("generated XML is unusable: {e}"))?;
            Ok((text, doc))
        },
    )?;
    calls += parsed.attempts as usize;
    let (text, generated) = parsed.value;
    artifacts.push(StageArtifact {
        stage: Stage::BpmnXml,
        payload: Value::String(text),
        raw_response: parsed.raw,
        attempts: parsed.attempts,
    });

    let (mut document, _) = strip_di(&generated);
    let mut report = validate(&document);
    let mut correction = None;
    if !report.compliant {
        let mut state = CorrectionState {
            limit: opts.correction_limit,
            window: opts.history_window,
            simple_threshold: opts.simple_threshold,
            ..CorrectionState::default()
        };
        let outcome = correct_model(&document, llm, &mut state)?;
        calls += outcome.iterations;
        document = outcome.document.clone();
        report = outcome.report.clone();
        correction = Some(outcome);
    }
    if report.compliant && opts.layout {
        let di = auto_layout(&document).map_err(|e| LlmError::Model(e.to_string()))?;
        document = reattach_di(&document, &di).document;
    }
    let result = Reconstruction {
        document,
        artifacts,
        report,
        correction,
        llm_calls: calls,
    };
    if result.report.compliant {
        Ok(result)
    } else {
        Err(LlmError::ReconstructionNonCompliant(Box::new(result)))
    }
}

/// Writes `stage1.json` … `stage5.json`, `stage6.bpmn` (the generated XML),
/// `correction.log.jsonl` and `final.bpmn` into `dir`.
pub fn write_run_dir(dir: &Path, run: &Reconstruction) -> Result<(), LlmError> {
    fs::create_dir_all(dir)?;
    for artifact in &run.artifacts {
        let path = dir.join(artifact.stage.file_name());
        match (&artifact.stage, &artifact.payload) {
            (Stage::BpmnXml, Value::String(xml)) => fs::write(path, xml)?,
            (_, payload) => fs::write(
                path,
                serde_json::to_string_pretty(payload).expect("payload serializes") + "\n",
            )?,
        }
    }
    let mut log = fs::File::create(dir.join("correction.log.jsonl"))?;
    for entry in run.correction.iter().flat_map(|c| &c.log) {
        writeln!(
            log,
            "{}",
            serde_json::to_string(entry).expect("log entry serializes")
        )?;
    }
    fs::write(dir.join("final.bpmn"), serialize(&run.document))?;
    Ok(())
}
