mod common;

use bpmnkit::compliance::{diff_reports, validate, validate_bytes, RuleCode, Severity};
use common::{defect_files, fixtures, load, model_files};

const EXPECTED: [(&str, RuleCode, &str); 6] = [
    ("r1-missing-default", RuleCode::DefaultFlow, "Gateway_1"),
    (
        "r2-missing-condition",
        RuleCode::ConditionExpression,
        "Flow_A",
    ),
    (
        "r3-data-ref-order",
        RuleCode::DataReferenceOrder,
        "DataObjectReference_1",
    ),
    ("r4-dead-end", RuleCode::Connectivity, "Task_B"),
    ("r5-duplicate-id", RuleCode::WellFormed, "Annotation_1"),
    ("r6-no-end", RuleCode::StartEnd, "Process_R6"),
];

#[test]
fn each_seeded_defect_yields_exactly_its_error() {
    for (name, code, element) in EXPECTED {
        let doc = load(&fixtures().join("defects").join(format!("{name}.bpmn")));
        let report = validate(&doc);
        let errors: Vec<_> = report.errors().collect();
        assert_eq!(errors.len(), 1, "{name}: {errors:?}");
        assert_eq!(errors[0].code, code, "{name}");
        assert_eq!(errors[0].element_id.as_deref(), Some(element), "{name}");
        assert!(!report.compliant);
    }
}

#[test]
fn clean_fixture_has_no_diagnostics() {
    let report = validate(&load(&fixtures().join("defects/clean.bpmn")));
    assert!(report.compliant);
    assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
}

#[test]
fn defect_directory_is_complete() {
    let names: Vec<String> = defect_files()
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.len(), 7);
    for (name, _, _) in EXPECTED {
        assert!(names.iter().any(|n| n == name), "missing {name}");
    }
}

#[test]
fn corpus_models_are_compliant() {
    for path in model_files()
        .into_iter()
        .filter(|p| !p.ends_with("empty-process.bpmn"))
    {
        let report = validate(&load(&path));
        assert!(
            report.compliant,
            "{}: {:?}",
            path.display(),
            report.diagnostics
        );
    }
}

#[test]
fn process_without_events_is_reported_once() {
    let report = validate(&load(&fixtures().join("models/empty-process.bpmn")));
    let errors: Vec<_> = report.errors().collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].code, RuleCode::StartEnd);
    assert_eq!(
        errors[0].message,
        "process has neither a start event nor an end event"
    );
}

#[test]
fn validation_is_deterministic() {
    for path in defect_files() {
        let doc = load(&path);
        assert_eq!(validate(&doc), validate(&doc));
    }
}

#[test]
fn unparseable_input_is_reported_not_raised() {
    let report = validate_bytes(b"<definitions><process id='p'>");
    assert!(!report.compliant);
    assert_eq!(report.diagnostics[0].code, RuleCode::WellFormed);
    assert_eq!(report.diagnostics[0].severity, Severity::Error);
}

#[test]
fn report_json_uses_rule_codes() {
    let doc = load(&fixtures().join("defects/r2-missing-condition.bpmn"));
    let json: serde_json::Value = serde_json::from_str(&validate(&doc).to_json()).unwrap();
    assert_eq!(json["compliant"], false);
    assert_eq!(json["diagnostics"][0]["code"], "R2_CONDITION_EXPR");
    assert_eq!(json["diagnostics"][0]["element_id"], "Flow_A");
}

#[test]
fn diff_between_defect_and_clean() {
    let broken = validate(&load(&fixtures().join("defects/r1-missing-default.bpmn")));
    let clean = validate(&load(&fixtures().join("defects/clean.bpmn")));
    let d = diff_reports(&broken, &clean);
    assert_eq!(d.resolved.len(), 1);
    assert!(d.new.is_empty());
    assert!(d.persisting.is_empty());
}
