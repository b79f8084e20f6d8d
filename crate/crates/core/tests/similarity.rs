mod common;

use std::collections::BTreeMap;

use bpmnkit::embeddings::HashingEmbedder;
use bpmnkit::model::{build_graph, graph_stats};
use bpmnkit::similarity::{compare, CompareOptions, TypeMode};
use bpmnkit::xml::Element;
use common::{expected, graph_of, load, model, model_files, pairs};

#[test]
fn breakdowns_match_reference_values() {
    let expected = expected();
    let embed = HashingEmbedder::default();
    let pairs = pairs();
    assert_eq!(pairs.len(), 10);
    for p in pairs {
        let got = compare(
            &graph_of(&load(&p.ground_truth)),
            &graph_of(&load(&p.reconstruction)),
            &embed,
            &CompareOptions::default(),
        )
        .unwrap();
        let want = expected.pairs[&p.id];
        for (g, w) in got.dimensions().iter().zip(want.dimensions()) {
            assert!((g - w).abs() < 1e-9, "{}: got {got:?}, want {want:?}", p.id);
        }
        assert!((got.overall - want.overall).abs() < 1e-9, "{}", p.id);
    }
}

#[test]
fn every_fixture_is_exactly_self_similar() {
    let embed = HashingEmbedder::default();
    for path in model_files() {
        let g = graph_of(&load(&path));
        for opts in [
            CompareOptions::default(),
            CompareOptions {
                context: false,
                type_mode: TypeMode::Tag,
            },
        ] {
            let b = compare(&g, &g, &embed, &opts).unwrap();
            assert_eq!(b.dimensions(), [1.0; 5], "{}", path.display());
            assert_eq!(b.overall, 1.0);
        }
    }
}

#[test]
fn comparison_is_symmetric() {
    let embed = HashingEmbedder::default();
    for p in pairs() {
        let (a, b) = (
            graph_of(&load(&p.ground_truth)),
            graph_of(&load(&p.reconstruction)),
        );
        let ab = compare(&a, &b, &embed, &CompareOptions::default()).unwrap();
        let ba = compare(&b, &a, &embed, &CompareOptions::default()).unwrap();
        for (x, y) in ab.dimensions().iter().zip(ba.dimensions()) {
            assert!((x - y).abs() < 1e-9, "{}", p.id);
        }
    }
}

fn relabel(e: &mut Element, names: &BTreeMap<&str, &str>) {
    if let Some(new) = e.attr("name").and_then(|n| names.get(n)) {
        e.set_attr("name", *new);
    }
    for c in e.child_elements_mut() {
        relabel(c, names);
    }
}

#[test]
fn relabeling_only_moves_name_dimensions() {
    let original = model("order-v1");
    let mut renamed = original.clone();
    let g = graph_of(&original);
    let synonyms = [
        "Incoming purchase",
        "Verify",
        "Confirm",
        "Dispatch",
        "Complete",
        "Bill",
        "Archive",
    ];
    let names: BTreeMap<&str, &str> = g
        .nodes()
        .iter()
        .filter(|n| !n.label.is_empty())
        .map(|n| n.label.as_str())
        .zip(synonyms)
        .collect();
    relabel(&mut renamed.root, &names);
    let b = compare(
        &g,
        &graph_of(&renamed),
        &HashingEmbedder::default(),
        &CompareOptions::default(),
    )
    .unwrap();
    assert_eq!(b.structural, 1.0);
    assert_eq!(b.type_distribution, 1.0);
    assert_eq!(b.semantic_type, 1.0);
    assert!(b.semantic_name < 1.0);
    assert!(b.semantic_name_type < 1.0);
}

#[test]
fn loan_fixture_counts() {
    let g = build_graph(&model("loan-approval")).unwrap();
    assert!(g.warnings.is_empty(), "{:?}", g.warnings);
    let s = graph_stats(&g.graph);
    assert_eq!((s.node_count, s.edge_count), (10, 12));
    assert_eq!(s.degree_sequence.iter().sum::<usize>(), 24);
}

#[test]
fn boundary_events_attach_to_host() {
    let g = graph_of(&model("boundary-timer"));
    let attach: Vec<_> = g
        .edges()
        .iter()
        .filter(|e| e.tag == "attachedToRef")
        .collect();
    assert_eq!(attach.len(), 1);
    assert!(attach[0].id.ends_with("#attachedToRef"));
}

#[test]
fn subprocess_contents_are_flattened() {
    let g = graph_of(&model("subprocess"));
    assert_eq!(g.node_count(), 8);
    for id in [
        "SubProcess_Handle",
        "StartEvent_Sub",
        "Task_Assess",
        "Task_Settle",
        "EndEvent_Sub",
    ] {
        assert!(g.nodes().iter().any(|n| n.id == id), "{id} missing");
    }
}

#[test]
fn dangling_flows_are_dropped_with_warning() {
    let xml = br#"<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL" id="d"><process id="p">
      <startEvent id="s"/><endEvent id="e"/>
      <sequenceFlow id="f1" sourceRef="s" targetRef="e"/>
      <sequenceFlow id="f2" sourceRef="s" targetRef="ghost"/>
    </process></definitions>"#;
    let built = build_graph(&bpmnkit::xml::parse(xml).unwrap()).unwrap();
    assert_eq!(built.graph.edge_count(), 1);
    assert_eq!(built.warnings.len(), 1);
}
