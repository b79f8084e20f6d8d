use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::json::{extract_json, extract_xml};
use super::{prompts, ChatMessage, LlmClient, LlmError};
use crate::compliance::{validate, ComplianceReport};
use crate::model::build_graph;
use crate::xml::{
    self, parse_fragment, reattach_di, serialize, strip_di, BpmnDocument, Element, Node,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectionMode {
    /// Ask for a complete corrected document.
    Regenerate,
    /// Ask for a list of local edits and apply them to the tree.
    LocalRepair,
}

/// One prompt and the reply it received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct CorrectionState {
    pub iteration: usize,
    pub limit: usize,
    /// Number of past exchanges replayed to the model each round.
    pub window: usize,
    /// Models with at most this many graph nodes are regenerated; larger ones are repaired locally.
    pub simple_threshold: usize,
    pub history: VecDeque<Exchange>,
    pub last_report: Option<ComplianceReport>,
    pub mode: Option<CorrectionMode>,
}

impl Default for CorrectionState {
    fn default() -> Self {
        Self {
            iteration: 0,
            limit: 5,
            window: 2,
            simple_threshold: 10,
            history: VecDeque::new(),
            last_report: None,
            mode: None,
        }
    }
}

impl CorrectionState {
    pub fn with_limit(limit: usize) -> Self {
        Self {
            limit,
            ..Self::default()
        }
    }

    fn remember(&mut self, exchange: Exchange) {
        self.history.push_back(exchange);
        while self.history.len() > self.window {
            self.history.pop_front();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairKind {
    Replace,
    Augment,
    Modify,
    Delete,
}

/// A local edit proposed by the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairAction {
    pub action: RepairKind,
    #[serde(default)]
    pub target_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_xml: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    /// Attribute values to set; `null` removes the attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<BTreeMap<String, Option<String>>>,
}

/// One line of `correction.log.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionLogEntry {
    pub iteration: usize,
    pub mode: CorrectionMode,
    pub errors_before: usize,
    pub errors_after: Option<usize>,
    pub accepted: bool,
    pub note: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorrectionOutcome {
    pub document: BpmnDocument,
    pub report: ComplianceReport,
    pub iterations: usize,
    pub log: Vec<CorrectionLogEntry>,
    pub warnings: Vec<String>,
}

fn parse_actions(raw: &str) -> Result<Vec<RepairAction>, String> {
    let value = match extract_json(raw)? {
        Value::Object(mut o) if o.contains_key("actions") => {
            o.remove("actions").unwrap_or_default()
        }
        v @ Value::Object(_) => Value::Array(vec![v]),
        v => v,
    };
    serde_json::from_value(value).map_err(|e| format!("invalid repair action list: {e}"))
}

fn single_fragment(doc: &BpmnDocument, xml: &str, warnings: &mut Vec<String>) -> Option<Element> {
    match parse_fragment(doc, xml) {
        Ok(mut elements) if !elements.is_empty() => {
            if elements.len() > 1 {
                warnings.push(format!(
                    "only the first of {} elements in new_xml was used",
                    elements.len()
                ));
            }
            Some(elements.swap_remove(0))
        }
        Ok(_) => {
            warnings.push("new_xml contains no element".into());
            None
        }
        Err(e) => {
            warnings.push(format!("new_xml is not valid XML: {e}"));
            None
        }
    }
}

/// Drops `<incoming>`/`<outgoing>` children that name `id`.
fn forget_flow(e: &mut Element, id: &str) {
    e.children.retain(|n| match n {
        Node::Element(c) => {
            !(matches!(c.local_name(), "incoming" | "outgoing") && c.text().trim() == id)
        }
        _ => true,
    });
    for c in e.child_elements_mut() {
        forget_flow(c, id);
    }
}

/// Applies `actions` in order. Actions whose target cannot be found, or
/// whose XML does not parse, are skipped with a warning.
pub fn apply_repair_actions(
    doc: &mut BpmnDocument,
    actions: &[RepairAction],
) -> (usize, Vec<String>) {
    let mut applied = 0;
    let mut warnings = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        let target = a.target_id.as_deref().unwrap_or("");
        let ok = match a.action {
            RepairKind::Delete => match doc.root.remove_by_id(target) {
                Some(_) => {
                    forget_flow(&mut doc.root, target);
                    true
                }
                None => false,
            },
            RepairKind::Modify if a.new_xml.is_none() => match doc.root.find_by_id_mut(target) {
                Some(e) => {
                    for (name, value) in a.attributes.iter().flatten() {
                        match value {
                            Some(v) => e.set_attr(name, v.clone()),
                            None => {
                                e.remove_attr(name);
                            }
                        }
                    }
                    true
                }
                None => false,
            },
            RepairKind::Replace | RepairKind::Modify => {
                if doc.root.find_by_id(target).is_none() {
                    false
                } else {
                    let xml = a.new_xml.as_deref().unwrap_or("");
                    match single_fragment(doc, xml, &mut warnings) {
                        Some(new) => doc.root.replace_by_id(target, new).is_ok(),
                        None => continue,
                    }
                }
            }
            RepairKind::Augment => {
                let parent = a.parent_id.as_deref().unwrap_or(target);
                if doc.root.find_by_id(parent).is_none() {
                    warnings.push(format!(
                        "action {i} (augment): parent `{parent}` not found, skipped"
                    ));
                    continue;
                }
                let xml = a.new_xml.as_deref().unwrap_or("");
                match single_fragment(doc, xml, &mut warnings) {
                    Some(child) => {
                        if let Some(p) = doc.root.find_by_id_mut(parent) {
                            p.push_child(child);
                        }
                        true
                    }
                    None => continue,
                }
            }
        };
        if ok {
            applied += 1;
        } else {
            warnings.push(format!(
                "action {i} ({:?}): target `{target}` not found, skipped",
                a.action
            ));
        }
    }
    (applied, warnings)
}

fn to_text(doc: &BpmnDocument) -> String {
    String::from_utf8_lossy(&serialize(doc)).into_owned()
}

/// Closed-loop correction: validate, ask for a fix, re-validate, repeat until
/// compliant or `state.limit` rounds have been spent.
///
/// Each round costs exactly one LLM call. A candidate with more errors than
/// the current model is discarded. Diagram interchange is removed for the
/// loop and restored on the result.
pub fn correct_model(
    doc: &BpmnDocument,
    llm: &LlmClient,
    state: &mut CorrectionState,
) -> Result<CorrectionOutcome, LlmError> {
    let (mut current, di) = strip_di(doc);
    let mut report = validate(&current);
    state.last_report = Some(report.clone());
    if report.compliant {
        return Ok(CorrectionOutcome {
            document: doc.clone(),
            report,
            iterations: 0,
            log: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let mut log = Vec::new();
    let mut used = 0;
    while !report.compliant && state.iteration < state.limit {
        state.iteration += 1;
        used += 1;
        let nodes = build_graph(&current)
            .map(|b| b.graph.node_count())
            .unwrap_or(0);
        let mode = if nodes <= state.simple_threshold {
            CorrectionMode::Regenerate
        } else {
            CorrectionMode::LocalRepair
        };
        state.mode = Some(mode);
        let system = match mode {
            CorrectionMode::Regenerate => prompts::regenerate_system(),
            CorrectionMode::LocalRepair => prompts::repair_system(),
        };
        let prompt =
            prompts::correction_user(&to_text(&current), &report.to_json(), state.iteration);
        let mut messages = vec![ChatMessage::system(system)];
        for ex in &state.history {
            messages.push(ChatMessage::user(ex.prompt.clone()));
            messages.push(ChatMessage::assistant(ex.response.clone()));
        }
        messages.push(ChatMessage::user(prompt.clone()));
        let response = llm.complete(&messages)?;
        state.remember(Exchange {
            prompt,
            response: response.clone(),
        });

        let errors_before = report.error_count();
        let mut warnings = Vec::new();
        let candidate: Result<BpmnDocument, String> = match mode {
            CorrectionMode::Regenerate => extract_xml(&response)
                .and_then(|x| xml::parse(x.as_bytes()).map_err(|e| e.to_string()))
                .map(|d| strip_di(&d).0),
            CorrectionMode::LocalRepair => parse_actions(&response).map(|actions| {
                let mut next = current.clone();
                let (applied, w) = apply_repair_actions(&mut next, &actions);
                warnings.extend(w);
                warnings.push(format!("{applied} of {} action(s) applied", actions.len()));
                next
            }),
        };
        let entry = match candidate {
            Err(e) => CorrectionLogEntry {
                iteration: state.iteration,
                mode,
                errors_before,
                errors_after: None,
                accepted: false,
                note: format!("unusable response: {e}"),
                warnings,
            },
            Ok(next) => {
                let next_report = validate(&next);
                let errors_after = next_report.error_count();
                let accepted = errors_after <= errors_before;
                if accepted {
                    current = next;
                    report = next_report;
                }
                CorrectionLogEntry {
                    iteration: state.iteration,
                    mode,
                    errors_before,
                    errors_after: Some(errors_after),
                    accepted,
                    note: if accepted {
                        "accepted".into()
                    } else {
                        "rolled back: error count increased".into()
                    },
                    warnings,
                }
            }
        };
        log.push(entry);
        state.last_report = Some(report.clone());
    }
    let restored = reattach_di(&current, &di);
    let warnings = restored
        .dropped
        .iter()
        .map(|id| format!("diagram element for removed `{id}` dropped"))
        .collect();
    Ok(CorrectionOutcome {
        document: restored.document,
        report,
        iterations: used,
        log,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> BpmnDocument {
        xml::parse(
            br#"<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL" id="d">
  <process id="p">
    <task id="a"><outgoing>f1</outgoing></task>
    <task id="b"><incoming>f1</incoming></task>
    <sequenceFlow id="f1" sourceRef="a" targetRef="b"/>
  </process>
</definitions>"#,
        )
        .unwrap()
    }

    #[test]
    fn actions_parse_in_several_shapes() {
        let list = parse_actions(r#"[{"action":"delete","target_id":"x"}]"#).unwrap();
        assert_eq!(list[0].action, RepairKind::Delete);
        let wrapped = parse_actions(
            r#"{"actions":[{"action":"modify","target_id":"g","attributes":{"default":"f2"}}]}"#,
        )
        .unwrap();
        assert_eq!(
            wrapped[0].attributes.as_ref().unwrap()["default"].as_deref(),
            Some("f2")
        );
        let single =
            parse_actions(r#"{"action":"augment","parent_id":"p","new_xml":"<task id='t'/>"}"#)
                .unwrap();
        assert_eq!(single[0].parent_id.as_deref(), Some("p"));
        assert!(parse_actions(r#"[{"action":"explode"}]"#).is_err());
    }

    #[test]
    fn each_action_kind() {
        let mut d = doc();
        let actions = vec![
            RepairAction {
                action: RepairKind::Modify,
                target_id: Some("a".into()),
                new_xml: None,
                parent_id: None,
                attributes: Some([("name".to_owned(), Some("Start work".to_owned()))].into()),
            },
            RepairAction {
                action: RepairKind::Replace,
                target_id: Some("b".into()),
                new_xml: Some(
                    r#"<userTask id="b" name="Review"><incoming>f1</incoming></userTask>"#.into(),
                ),
                parent_id: None,
                attributes: None,
            },
            RepairAction {
                action: RepairKind::Augment,
                target_id: None,
                new_xml: Some(r#"<endEvent id="e"/>"#.into()),
                parent_id: Some("p".into()),
                attributes: None,
            },
            RepairAction {
                action: RepairKind::Delete,
                target_id: Some("f1".into()),
                new_xml: None,
                parent_id: None,
                attributes: None,
            },
        ];
        let (applied, warnings) = apply_repair_actions(&mut d, &actions);
        assert_eq!(applied, 4, "{warnings:?}");
        assert_eq!(d.find_by_id("a").unwrap().attr("name"), Some("Start work"));
        assert_eq!(d.find_by_id("b").unwrap().local_name(), "userTask");
        assert!(d.find_by_id("e").is_some());
        assert!(d.find_by_id("f1").is_none());
        assert!(d.find_by_id("a").unwrap().child("outgoing").is_none());
    }

    #[test]
    fn missing_target_is_skipped() {
        let mut d = doc();
        let before = d.clone();
        let (applied, warnings) = apply_repair_actions(
            &mut d,
            &[RepairAction {
                action: RepairKind::Delete,
                target_id: Some("nope".into()),
                new_xml: None,
                parent_id: None,
                attributes: None,
            }],
        );
        assert_eq!(applied, 0);
        assert!(warnings[0].contains("nope"));
        assert_eq!(d, before);
    }

    #[test]
    fn history_window_is_bounded() {
        let mut s = CorrectionState::default();
        for i in 0..5 {
            s.remember(Exchange {
                prompt: i.to_string(),
                response: String::new(),
            });
        }
        assert_eq!(s.history.len(), 2);
        assert_eq!(s.history[0].prompt, "3");
    }
}
