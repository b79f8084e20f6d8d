mod common;

use std::collections::BTreeMap;

use bpmnkit::llm::{translate_model, TranslateOptions};
use bpmnkit::model::build_graph;
use bpmnkit::xml::{
    auto_layout, extract_strings, parse, reattach_di, serialize, strip_di, Element, ExtractOptions,
};
use common::{fixtures, load, mock_llm, model, model_files, replies};

fn all_fixture_files() -> Vec<std::path::PathBuf> {
    let mut files = model_files();
    files.extend(common::defect_files());
    files
}

#[test]
fn parse_serialize_parse_is_identity() {
    for path in all_fixture_files() {
        let doc = load(&path);
        let bytes = serialize(&doc);
        let again = parse(&bytes).unwrap();
        assert_eq!(doc, again, "{}", path.display());
        assert_eq!(
            serialize(&again),
            bytes,
            "serialization not stable for {}",
            path.display()
        );
    }
}

#[test]
fn serialization_preserves_source_text() {
    let path = fixtures().join("models/loan-approval.bpmn");
    let original = std::fs::read_to_string(&path).unwrap();
    let out = String::from_utf8(serialize(&load(&path))).unwrap();
    let normalize = |s: &str| {
        s.lines()
            .map(|l| l.trim_end().replace(" />", "/>"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(normalize(&out).trim(), normalize(&original).trim());
}

#[test]
fn di_strip_and_reattach() {
    for path in model_files() {
        let doc = load(&path);
        let (stripped, di) = strip_di(&doc);
        assert!(!String::from_utf8_lossy(&serialize(&stripped)).contains("BPMNDiagram"));
        let back = reattach_di(&stripped, &di);
        assert!(back.dropped.is_empty(), "{}", path.display());
        assert_eq!(back.document, doc, "{}", path.display());
    }
}

#[test]
fn layout_covers_every_flow_node() {
    for name in [
        "loan-approval",
        "subprocess",
        "boundary-timer",
        "message-collab",
    ] {
        let (stripped, _) = strip_di(&model(name));
        let di = auto_layout(&stripped).unwrap();
        let refs = di.references();
        let g = build_graph(&stripped).unwrap().graph;
        for n in g
            .nodes()
            .iter()
            .filter(|n| n.category.is_flow_node() || n.tag.ends_with("Reference"))
        {
            assert!(
                refs.values().any(|r| r == &n.id),
                "{name}: no shape for {}",
                n.id
            );
        }
        let laid_out = reattach_di(&stripped, &di).document;
        assert!(parse(&serialize(&laid_out)).is_ok());
    }
}

fn walk_pairs<'a>(a: &'a Element, b: &'a Element, out: &mut Vec<(&'a Element, &'a Element)>) {
    out.push((a, b));
    let (ca, cb): (Vec<_>, Vec<_>) = (a.child_elements().collect(), b.child_elements().collect());
    assert_eq!(ca.len(), cb.len(), "child count differs under {}", a.name);
    for (x, y) in ca.into_iter().zip(cb) {
        walk_pairs(x, y, out);
    }
}

#[test]
fn translation_touches_only_configured_text() {
    let doc = model("german-names");
    let strings = extract_strings(&doc, &ExtractOptions::default());
    let values: Vec<&str> = strings.iter().map(|s| s.value.as_str()).collect();
    assert_eq!(
        values.iter().filter(|v| **v == "Prüfen").count(),
        1,
        "duplicates collapse"
    );

    let mapping = serde_json::json!({
        "Bestellabwicklung": "Order handling",
        "Dieser Prozess beschreibt die Prüfung und den Versand einer Bestellung.":
            "This process describes checking and shipping an order.",
        "Bestellung  eingegangen": "Order received",
        " Prüfen ": "Check",
        "Versand": "Shipping",
        "Bestellung versendet\t": "Order shipped"
    });
    let (mock, llm) = mock_llm(replies([format!("```json\n{mapping}\n```")]));
    let t = translate_model(&doc, &llm, &TranslateOptions::default()).unwrap();
    assert_eq!(mock.calls(), 1);
    assert!(t.warnings.is_empty(), "{:?}", t.warnings);

    let mut pairs = Vec::new();
    walk_pairs(&doc.root, &t.document.root, &mut pairs);
    for (a, b) in pairs {
        assert_eq!(a.name, b.name);
        let strip = |e: &Element| -> BTreeMap<String, String> {
            e.attributes
                .iter()
                .filter(|at| at.name != "name")
                .map(|at| (at.name.clone(), at.value.clone()))
                .collect()
        };
        assert_eq!(
            strip(a),
            strip(b),
            "non-name attribute changed on {}",
            a.name
        );
        if a.local_name() != "documentation" {
            assert_eq!(a.text(), b.text(), "text changed on {}", a.name);
        }
    }

    let before = String::from_utf8(serialize(&doc)).unwrap();
    let after = String::from_utf8(serialize(&t.document)).unwrap();
    let changed: Vec<(&str, &str)> = before
        .lines()
        .zip(after.lines())
        .filter(|(x, y)| x != y)
        .collect();
    assert_eq!(before.lines().count(), after.lines().count());
    assert_eq!(
        changed.len(),
        7,
        "process, documentation, start, two tasks, versand, end"
    );
    for (x, y) in changed {
        assert!(
            x.contains("name=\"") || x.contains("documentation"),
            "unexpected change: {x} -> {y}"
        );
    }
    assert!(after.contains(r#"id="Task_Pruefen1" name="Check""#));
    assert!(after.contains(r#"id="Task_Pruefen2" name="Check""#));
    assert!(after.contains(r#"name="Order received""#));
}

#[test]
fn fuzzy_threshold_rejects_distant_keys() {
    let doc = model("german-names");
    let mapping = serde_json::json!({"Versandt und bezahlt": "Shipped and paid"});
    let (_, llm) = mock_llm(replies([mapping.to_string()]));
    let t = translate_model(&doc, &llm, &TranslateOptions::default()).unwrap();
    assert_eq!(t.replaced, 0);
    assert!(t.warnings.iter().any(|w| w.contains("Versand")));
    assert_eq!(t.document, doc);
}

#[test]
fn reference_attributes_are_never_translated() {
    let doc = model("german-names");
    let opts = TranslateOptions {
        extract: ExtractOptions::with_attributes(["name", "sourceRef", "id"], false),
        ..TranslateOptions::default()
    };
    let (_, llm) = mock_llm(replies([r#"{"Versand": "Shipping"}"#]));
    let t = translate_model(&doc, &llm, &opts).unwrap();
    assert_eq!(
        t.warnings
            .iter()
            .filter(|w| w.contains("identifier reference"))
            .count(),
        2
    );
    let out = String::from_utf8(serialize(&t.document)).unwrap();
    assert!(out.contains(r#"sourceRef="Task_Versand""#));
    assert!(
        out.contains("Dieser Prozess"),
        "documentation excluded by configuration"
    );
}
