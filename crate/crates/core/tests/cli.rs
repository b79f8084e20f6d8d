mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{compliant_xml, defective_xml, fenced, fixtures, stage_payloads};
use serde_json::{json, Value};

fn bpmnkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpmnkit"))
        .args(args)
        .env_remove("BPMNKIT_LLM_ENDPOINT")
        .env_remove("BPMNKIT_EMBED_ENDPOINT")
        .env_remove("BPMNKIT_JOBS")
        .output()
        .unwrap()
}

fn model_path(name: &str) -> String {
    fixtures()
        .join("models")
        .join(format!("{name}.bpmn"))
        .display()
        .to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_script(dir: &Path, name: &str, replies: &[String]) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(replies).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn validate_reports_through_exit_code() {
    let ok = bpmnkit(&["validate", &model_path("loan-approval")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["compliant"], true);

    let bad = bpmnkit(&[
        "validate",
        &fixtures()
            .join("defects/r1-missing-default.bpmn")
            .display()
            .to_string(),
    ]);
    assert_eq!(bad.status.code(), Some(3));
    assert_eq!(
        stdout_json(&bad)["diagnostics"][0]["code"],
        "R1_DEFAULT_FLOW"
    );
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bpmnkit(&["validate"]).status.code(), Some(2));
    assert_eq!(bpmnkit(&["frobnicate"]).status.code(), Some(2));
    let t = bpmnkit(&[
        "translate",
        &model_path("chain3"),
        "-o",
        "/tmp/x.bpmn",
        "--threshold",
        "1.5",
    ]);
    assert_eq!(t.status.code(), Some(2));
    assert_eq!(bpmnkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn operational_failures_exit_with_one() {
    let missing = bpmnkit(&["validate", "/nonexistent/model.bpmn"]);
    assert_eq!(missing.status.code(), Some(1));
    let no_endpoint = bpmnkit(&["describe", &model_path("chain3")]);
    assert_eq!(no_endpoint.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&no_endpoint.stderr).contains("endpoint"));
}

#[test]
fn compare_prints_the_breakdown() {
    let out = bpmnkit(&[
        "compare",
        &model_path("chain3"),
        &model_path("chain5"),
        "--embed-fallback",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let got = stdout_json(&out);
    let want = &common::expected().pairs["chain"];
    assert!((got["overall"].as_f64().unwrap() - want.overall).abs() < 1e-9);

    let same = bpmnkit(&[
        "compare",
        &model_path("order-v1"),
        &model_path("order-v1"),
        "--embed-fallback",
    ]);
    assert_eq!(stdout_json(&same)["overall"], 1.0);
}

#[test]
fn describe_and_correct_with_scripted_replies() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path(), "d.json", &["A short description.".into()]);
    let out = bpmnkit(&["describe", &model_path("chain3"), "--llm-mock", &script]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "A short description."
    );

    let input = dir.path().join("in.bpmn");
    fs::write(&input, defective_xml()).unwrap();
    let script = write_script(dir.path(), "c.json", &[fenced(&compliant_xml())]);
    let output = dir.path().join("out/fixed.bpmn");
    let log = dir.path().join("log.jsonl");
    let out = bpmnkit(&[
        "correct",
        &input.display().to_string(),
        "-o",
        &output.display().to_string(),
        "--log",
        &log.display().to_string(),
        "--llm-mock",
        &script,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(output.is_file());
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 1);

    let script = write_script(dir.path(), "n.json", &vec![fenced(&defective_xml()); 2]);
    let out = bpmnkit(&[
        "correct",
        &input.display().to_string(),
        "-o",
        &output.display().to_string(),
        "--limit",
        "2",
        "--llm-mock",
        &script,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reconstruct_writes_model_and_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let desc = dir.path().join("desc.txt");
    fs::write(&desc, common::DESCRIPTION).unwrap();
    let mut replies = stage_payloads();
    replies.push(fenced(&compliant_xml()));
    let script = write_script(dir.path(), "r.json", &replies);
    let out_model = dir.path().join("model.bpmn");
    let run_dir = dir.path().join("run");
    let out = bpmnkit(&[
        "reconstruct",
        &desc.display().to_string(),
        "-o",
        &out_model.display().to_string(),
        "--run-dir",
        &run_dir.display().to_string(),
        "--llm-mock",
        &script,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(fs::read_to_string(&out_model)
        .unwrap()
        .contains("BPMNDiagram"));
    assert!(run_dir.join("stage1.json").is_file());
    assert!(run_dir.join("stage6.bpmn").is_file());
}

fn batch(manifest: &Path, stage: &str, script: Option<&str>) -> Output {
    let manifest = manifest.display().to_string();
    let mut args = vec![
        "batch",
        manifest.as_str(),
        "--stage",
        stage,
        "--embed-fallback",
        "--jobs",
        "2",
    ];
    if let Some(s) = script {
        args.extend(["--llm-mock", s]);
    }
    let out = bpmnkit(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{stage}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn entry(manifest: &Path) -> Value {
    let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    m["entries"][0].clone()
}

#[test]
fn batch_runs_every_stage_and_resumes_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("order.bpmn"), defective_xml()).unwrap();
    let manifest = root.join("manifest.json");
    fs::write(
        &manifest,
        json!({"entries": [{"model_path": "order.bpmn"}]}).to_string(),
    )
    .unwrap();

    let s = write_script(
        root,
        "t.json",
        &[r#"{"Check order": "Bestellung prüfen"}"#.into()],
    );
    batch(&manifest, "translate", Some(&s));
    assert_eq!(entry(&manifest)["status"], "translated");
    assert_eq!(entry(&manifest)["model_path"], "translated/order.bpmn");
    assert!(fs::read_to_string(root.join("translated/order.bpmn"))
        .unwrap()
        .contains("Bestellung prüfen"));

    let s = write_script(root, "c.json", &[fenced(&compliant_xml())]);
    batch(&manifest, "correct", Some(&s));
    assert_eq!(entry(&manifest)["status"], "compliant");

    let s = write_script(root, "d.json", &[common::DESCRIPTION.into()]);
    batch(&manifest, "describe", Some(&s));
    assert_eq!(
        entry(&manifest)["description_path"],
        "descriptions/order.txt"
    );

    let mut replies = stage_payloads();
    replies.push(fenced(&compliant_xml()));
    let s = write_script(root, "r.json", &replies);
    batch(&manifest, "reconstruct", Some(&s));
    assert_eq!(entry(&manifest)["status"], "reconstructed");
    assert!(root.join("runs/order/stage6.bpmn").is_file());

    let first = batch(&manifest, "evaluate", None);
    let csv = String::from_utf8_lossy(&first.stdout).into_owned();
    assert!(
        csv.starts_with("Metric,Average Score\nStructural Similarity,1.0000\n"),
        "{csv}"
    );
    assert!(csv.contains("Overall Similarity,1.0000\n"));
    assert!(root.join("results/order.json").is_file());
    assert_eq!(fs::read_to_string(root.join("summary.csv")).unwrap(), csv);

    let again = batch(&manifest, "evaluate", None);
    assert!(String::from_utf8_lossy(&again.stderr).contains("1 already scored"));
    assert_eq!(String::from_utf8_lossy(&again.stdout), csv);
}

#[test]
fn report_renders_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results");
    let embed = bpmnkit::embeddings::HashingEmbedder::default();
    for p in common::pairs() {
        let r = bpmnkit::report::evaluate_pair(&p, &embed, &Default::default());
        bpmnkit::report::write_result(&results, &r).unwrap();
    }
    let results_arg = results.display().to_string();
    let csv_path = dir.path().join("summary.csv");
    let out = bpmnkit(&[
        "report",
        &results_arg,
        "-o",
        &csv_path.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(&csv_path)
        .unwrap()
        .starts_with("Metric,Average Score\n"));

    let out = bpmnkit(&["report", &results_arg, "--descriptions", "20"]);
    let report = stdout_json(&out);
    assert_eq!(report["counts"]["evaluated"], 10);
    let avg = report["averages"]["overall"].as_f64().unwrap();
    assert!((avg - common::expected().averages["overall"]).abs() < 1e-9);
    let norm = report["description_normalized_averages"]["overall"]
        .as_f64()
        .unwrap();
    assert!((norm - avg / 2.0).abs() < 1e-12);

    let bad = bpmnkit(&["report", &results_arg, "-o", "summary.txt"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config: PathBuf = dir.path().join("bpmnkit.json");
    fs::write(
        &config,
        r#"{"embed-endpoint": "http://127.0.0.1:9/embed", "jobs": 2}"#,
    )
    .unwrap();
    let cfg = config.display().to_string();
    let a = model_path("chain3");
    let remote = bpmnkit(&["--config", &cfg, "compare", &a, &a]);
    assert_eq!(
        remote.status.code(),
        Some(1),
        "the unreachable endpoint from the file is used"
    );
    let local = bpmnkit(&["--config", &cfg, "compare", &a, &a, "--embed-fallback"]);
    assert_eq!(local.status.code(), Some(0));

    fs::write(&config, r#"{"no-such-key": 1}"#).unwrap();
    assert_eq!(
        bpmnkit(&["--config", &cfg, "validate", &a]).status.code(),
        Some(2)
    );
}
