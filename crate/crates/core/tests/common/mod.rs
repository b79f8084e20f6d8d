#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bpmnkit::llm::{LlmClient, LlmClientConfig, MockChatClient, MockReply};
use bpmnkit::model::{build_graph, BpmnGraph};
use bpmnkit::report::PairSpec;
use bpmnkit::similarity::SimilarityBreakdown;
use bpmnkit::xml::{self, BpmnDocument};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn bpmn_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "bpmn"))
        .collect();
    files.sort();
    files
}

pub fn model_files() -> Vec<PathBuf> {
    bpmn_files(&fixtures().join("models"))
}

pub fn defect_files() -> Vec<PathBuf> {
    bpmn_files(&fixtures().join("defects"))
}

/// Reference breakdowns computed by `fixtures/oracle/oracle.py`.
#[derive(serde::Deserialize)]
pub struct Expected {
    pub pairs: BTreeMap<String, SimilarityBreakdown>,
    pub averages: BTreeMap<String, f64>,
    pub histogram: Vec<usize>,
}

pub fn expected() -> Expected {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join("pairs/expected.json")).unwrap())
        .unwrap()
}

/// The scored fixture pairs, with paths resolved against the pairs directory.
pub fn pairs() -> Vec<PairSpec> {
    let dir = fixtures().join("pairs");
    let list: Vec<PairSpec> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("pairs.json")).unwrap()).unwrap();
    list.into_iter()
        .map(|p| PairSpec {
            ground_truth: dir.join(p.ground_truth),
            reconstruction: dir.join(p.reconstruction),
            ..p
        })
        .collect()
}

pub fn load(path: &Path) -> BpmnDocument {
    xml::parse(&std::fs::read(path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn model(name: &str) -> BpmnDocument {
    load(&fixtures().join("models").join(format!("{name}.bpmn")))
}

pub fn graph_of(doc: &BpmnDocument) -> BpmnGraph {
    build_graph(doc).unwrap().graph
}

pub fn mock_llm(script: Vec<MockReply>) -> (Arc<MockChatClient>, LlmClient) {
    let mock = Arc::new(MockChatClient::new(script));
    let config = LlmClientConfig {
        retry_delay_ms: 0,
        ..LlmClientConfig::default()
    };
    (mock.clone(), LlmClient::new(mock, config))
}

pub fn replies<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Vec<MockReply> {
    texts
        .into_iter()
        .map(|t| MockReply::Reply(t.into()))
        .collect()
}

pub const DESCRIPTION: &str = "When an order arrives, a clerk checks the order. \
If the order is valid the warehouse packs the goods and then ships them; \
otherwise the process ends without shipment.";

/// Validated payloads for the five JSON stages of a three-task process.
pub fn stage_payloads() -> Vec<String> {
    vec![
        r#"Here is the analysis:
```json
{"boundaries": {"start": "Order received", "end": "Order shipped"},
 "activities": [{"name": "Check order", "participant": "Clerk"},
                {"name": "Pack goods", "participant": "Warehouse"},
                {"name": "Ship goods", "participant": "Warehouse"}],
 "decisions": [{"name": "Order valid?"}]}
```"#
            .into(),
        r#"[{"decision": "Order valid?", "inputs": ["Order"],
             "outcomes": [{"label": "valid", "target": "Pack goods"}, {"label": "invalid", "target": "end"}]}]"#
            .into(),
        r#"[{"name": "Order", "class": "primary", "attributes": ["id", "items"]},
             {"name": "Shipping label", "class": "derived"}]"#
            .into(),
        r#"{"entities": [{"name": "Order", "attributes": [{"name": "id"}, {"name": "items"}]},
                          {"name": "Shipping label", "attributes": [{"name": "address"}]}],
             "relationships": [{"from": "Shipping label", "to": "Order"}]}"#
            .into(),
        r#"[{"activity": "Check order", "inputs": [{"object": "Order"}]},
             {"activity": "Ship goods", "inputs": [{"object": "Order"}], "outputs": [{"object": "Shipping label"}]}]"#
            .into(),
    ]
}

fn order_process(default_attr: &str, invalid_condition: &str) -> String {
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<bpmn:definitions xmlns:bpmn="http://www.omg.org/spec/BPMN/20100524/MODEL" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" id="Defs_Gen" targetNamespace="http://example.org/bpmn">
  <bpmn:process id="Process_Order" isExecutable="true">
    <bpmn:startEvent id="Start" name="Order received"><bpmn:outgoing>F1</bpmn:outgoing></bpmn:startEvent>
    <bpmn:userTask id="Check" name="Check order"><bpmn:incoming>F1</bpmn:incoming><bpmn:outgoing>F2</bpmn:outgoing></bpmn:userTask>
    <bpmn:exclusiveGateway id="Valid" name="Order valid?"{default_attr}><bpmn:incoming>F2</bpmn:incoming><bpmn:outgoing>F3</bpmn:outgoing><bpmn:outgoing>F6</bpmn:outgoing></bpmn:exclusiveGateway>
    <bpmn:task id="Pack" name="Pack goods"><bpmn:incoming>F3</bpmn:incoming><bpmn:outgoing>F4</bpmn:outgoing></bpmn:task>
    <bpmn:task id="Ship" name="Ship goods"><bpmn:incoming>F4</bpmn:incoming><bpmn:outgoing>F5</bpmn:outgoing></bpmn:task>
    <bpmn:endEvent id="Shipped" name="Order shipped"><bpmn:incoming>F5</bpmn:incoming></bpmn:endEvent>
    <bpmn:endEvent id="Rejected" name="Order rejected"><bpmn:incoming>F6</bpmn:incoming></bpmn:endEvent>
    <bpmn:sequenceFlow id="F1" sourceRef="Start" targetRef="Check"/>
    <bpmn:sequenceFlow id="F2" sourceRef="Check" targetRef="Valid"/>
    <bpmn:sequenceFlow id="F3" sourceRef="Valid" targetRef="Pack"><bpmn:conditionExpression xsi:type="bpmn:tFormalExpression">${{valid}}</bpmn:conditionExpression></bpmn:sequenceFlow>
    <bpmn:sequenceFlow id="F4" sourceRef="Pack" targetRef="Ship"/>
    <bpmn:sequenceFlow id="F5" sourceRef="Ship" targetRef="Shipped"/>
    <bpmn:sequenceFlow id="F6" sourceRef="Valid" targetRef="Rejected">{invalid_condition}</bpmn:sequenceFlow>
  </bpmn:process>
</bpmn:definitions>
"#
    )
}

/// Three-task process that passes every rule.
pub fn compliant_xml() -> String {
    order_process(r#" default="F6""#, "")
}

/// The same process with a gateway lacking its default flow (one R1 error).
pub fn defective_xml() -> String {
    order_process(
        "",
        r#"<bpmn:conditionExpression xsi:type="bpmn:tFormalExpression">${!valid}</bpmn:conditionExpression>"#,
    )
}

/// Wraps XML the way chat models usually return it.
pub fn fenced(xml: &str) -> String {
    format!("Here is the model:\n```xml\n{xml}```\n")
}

/// The defective process with its main end event removed, which adds errors.
pub fn worse_xml() -> String {
    defective_xml().replace(
        r#"<bpmn:endEvent id="Shipped" name="Order shipped"><bpmn:incoming>F5</bpmn:incoming></bpmn:endEvent>"#,
        "",
    )
}

/// What a correction run did when driven by a scripted sequence of replies.
pub struct CorrectionTrace {
    pub initial_errors: usize,
    pub final_errors: usize,
    pub accepted_errors: Vec<usize>,
    pub max_history: usize,
    pub calls: usize,
}

/// Runs a correction on the defective process, answering round `i` with
/// reply kind `kinds[i] % 4`: compliant, unchanged, worse, or unusable text.
pub fn scripted_correction(kinds: &[u8], window: usize) -> CorrectionTrace {
    use bpmnkit::llm::{correct_model, CorrectionState, Role};

    let script: Vec<String> = kinds
        .iter()
        .map(|k| match k % 4 {
            0 => fenced(&compliant_xml()),
            1 => fenced(&defective_xml()),
            2 => fenced(&worse_xml()),
            _ => "Sorry, I cannot help with that.".to_owned(),
        })
        .collect();
    let (mock, llm) = mock_llm(replies(script));
    let doc = xml::parse(defective_xml().as_bytes()).unwrap();
    let initial_errors = bpmnkit::compliance::validate(&doc).error_count();
    let mut state = CorrectionState {
        limit: kinds.len(),
        window,
        ..CorrectionState::default()
    };
    let out = correct_model(&doc, &llm, &mut state).unwrap();
    let max_history = mock
        .prompts()
        .iter()
        .map(|p| p.iter().filter(|m| m.role == Role::Assistant).count())
        .max()
        .unwrap_or(0);
    CorrectionTrace {
        initial_errors,
        final_errors: out.report.error_count(),
        accepted_errors: out
            .log
            .iter()
            .filter(|e| e.accepted)
            .filter_map(|e| e.errors_after)
            .collect(),
        max_history,
        calls: mock.calls(),
    }
}
