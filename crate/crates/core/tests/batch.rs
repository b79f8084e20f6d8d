mod common;

use bpmnkit::embeddings::HashingEmbedder;
use bpmnkit::report::{
    batch_evaluate, load_results, render_report, write_result, PairResult, PairSpec, ReportFormat,
};
use bpmnkit::similarity::CompareOptions;
use common::{expected, pairs};

#[test]
fn aggregate_matches_reference_values() {
    let want = expected();
    let report = batch_evaluate(
        &pairs(),
        &HashingEmbedder::default(),
        &CompareOptions::default(),
        4,
        None,
    );
    assert_eq!(report.counts.evaluated, 10);
    assert_eq!(report.counts.failed, 0);
    for (key, v) in &want.averages {
        assert!(
            (report.averages[key] - v).abs() < 1e-9,
            "{key}: {} vs {v}",
            report.averages[key]
        );
    }
    let counts: Vec<usize> = report.histogram.iter().map(|b| b.count).collect();
    assert_eq!(counts, want.histogram);
    assert_eq!(counts.iter().sum::<usize>(), 10);
}

#[test]
fn thread_count_does_not_change_results() {
    let embed = HashingEmbedder::default();
    let opts = CompareOptions::default();
    let one = batch_evaluate(&pairs(), &embed, &opts, 1, None);
    let many = batch_evaluate(&pairs(), &embed, &opts, 8, None);
    assert_eq!(one, many);
    assert_eq!(
        render_report(&one, ReportFormat::Csv),
        render_report(&many, ReportFormat::Csv)
    );
}

#[test]
fn csv_has_metric_table_and_histogram() {
    let report = batch_evaluate(
        &pairs(),
        &HashingEmbedder::default(),
        &CompareOptions::default(),
        2,
        None,
    );
    let csv = String::from_utf8(render_report(&report, ReportFormat::Csv)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "Metric,Average Score");
    assert_eq!(lines.len(), 1 + 6 + 1 + 1 + 20);
    assert!(lines[1..7].iter().all(|l| l
        .split(',')
        .nth(1)
        .unwrap()
        .split('.')
        .nth(1)
        .unwrap()
        .len()
        == 4));
    assert_eq!(lines[7], "");
    assert_eq!(lines[8], "bin_low,bin_high,count");
    assert_eq!(lines[9], "0.00,0.05,1");
    assert_eq!(lines[28], "0.95,1.00,0");
}

#[test]
fn failed_pairs_are_recorded_not_fatal() {
    let mut list = pairs();
    list.push(PairSpec {
        id: "missing".into(),
        ground_truth: "does/not/exist.bpmn".into(),
        reconstruction: list[0].reconstruction.clone(),
    });
    let report = batch_evaluate(
        &list,
        &HashingEmbedder::default(),
        &CompareOptions::default(),
        3,
        Some(12),
    );
    assert_eq!(report.counts.evaluated, 10);
    assert_eq!(report.counts.failed, 1);
    assert_eq!(report.counts.descriptions, 12);
    assert_eq!(report.errors[0].model_id, "missing");
    let norm = report.description_normalized_averages["overall"];
    assert!((norm - report.averages["overall"] * 10.0 / 12.0).abs() < 1e-12);
}

#[test]
fn results_round_trip_through_files() {
    let embed = HashingEmbedder::default();
    let dir = tempfile::tempdir().unwrap();
    let mut written = Vec::new();
    for p in pairs() {
        let r = bpmnkit::report::evaluate_pair(&p, &embed, &CompareOptions::default());
        write_result(dir.path(), &r).unwrap();
        written.push(r);
    }
    written.sort_by(|a, b| a.model_id().cmp(b.model_id()));
    let loaded = load_results(dir.path()).unwrap();
    assert_eq!(loaded, written);
    assert!(loaded.iter().all(|r| matches!(r, PairResult::Scored(_))));
}
