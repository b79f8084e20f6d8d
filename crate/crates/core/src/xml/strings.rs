//! Extraction and reinsertion of translatable text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::document::{BpmnDocument, Element, Node};

pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.8;

/// Attributes that hold identifiers or references and must never be rewritten.
const REFERENCE_ATTRIBUTES: &[&str] = &[
    "id",
    "default",
    "sourceRef",
    "targetRef",
    "attachedToRef",
    "dataObjectRef",
    "dataStoreRef",
    "processRef",
    "calledElement",
    "messageRef",
    "signalRef",
    "errorRef",
    "escalationRef",
    "bpmnElement",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TextSlot {
    Attribute(String),
    Text,
}

/// Where a string lives: child-node indices from the root element, plus the slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringLocation {
    pub path: Vec<usize>,
    pub slot: TextSlot,
}

/// One distinct translatable value and every place it occurs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslatableString {
    pub value: String,
    pub locations: Vec<StringLocation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    pub attributes: Vec<String>,
    pub documentation: bool,
    /// Configured attributes that were refused because they hold references.
    pub rejected: Vec<String>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            attributes: vec!["name".to_owned()],
            documentation: true,
            rejected: Vec::new(),
        }
    }
}

impl ExtractOptions {
    pub fn with_attributes<I, S>(attributes: I, documentation: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut opts = Self {
            attributes: Vec::new(),
            documentation,
            rejected: Vec::new(),
        };
        for a in attributes {
            let a = a.into();
            if REFERENCE_ATTRIBUTES.contains(&a.as_str()) {
                opts.rejected.push(a);
            } else if !opts.attributes.contains(&a) {
                opts.attributes.push(a);
            }
        }
        opts
    }

    pub fn warnings(&self) -> Vec<String> {
        self.rejected
            .iter()
            .map(|a| format!("attribute `{a}` holds an identifier reference and is not translated"))
            .collect()
    }
}

/// Collects translatable strings, one entry per distinct value, in first-seen order.
pub fn extract_strings(doc: &BpmnDocument, opts: &ExtractOptions) -> Vec<TranslatableString> {
    let mut out: Vec<TranslatableString> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut path = Vec::new();
    visit(
        &doc.root,
        &mut path,
        opts,
        &mut |value, location| match index.get(value) {
            Some(&i) => out[i].locations.push(location),
            None => {
                index.insert(value.to_owned(), out.len());
                out.push(TranslatableString {
                    value: value.to_owned(),
                    locations: vec![location],
                });
            }
        },
    );
    out
}

fn visit(
    e: &Element,
    path: &mut Vec<usize>,
    opts: &ExtractOptions,
    sink: &mut dyn FnMut(&str, StringLocation),
) {
    if e.is_bpmndi() {
        return;
    }
    for attr in &opts.attributes {
        if let Some(v) = e.attr(attr) {
            if !v.trim().is_empty() {
                sink(
                    v,
                    StringLocation {
                        path: path.clone(),
                        slot: TextSlot::Attribute(attr.clone()),
                    },
                );
            }
        }
    }
    if opts.documentation && e.local_name() == "documentation" {
        let text = e.text();
        if !text.trim().is_empty() {
            sink(
                &text,
                StringLocation {
                    path: path.clone(),
                    slot: TextSlot::Text,
                },
            );
        }
    }
    for (i, child) in e.children.iter().enumerate() {
        if let Node::Element(child) = child {
            path.push(i);
            visit(child, path, opts, sink);
            path.pop();
        }
    }
}

fn normalize(s: &str) -> String {
    s.trim().nfc().collect()
}

/// 1 − Levenshtein distance / longer length, over NFC-normalized, trimmed text.
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(&normalize(a), &normalize(b))
}

#[derive(Debug, Clone)]
pub struct Reinsertion {
    pub document: BpmnDocument,
    /// Number of locations rewritten.
    pub replaced: usize,
    pub warnings: Vec<String>,
}

pub fn reinsert_strings(
    doc: &BpmnDocument,
    mapping: &BTreeMap<String, String>,
    threshold: f64,
) -> Reinsertion {
    reinsert_strings_with(doc, mapping, threshold, &ExtractOptions::default())
}

/// Writes translations back. Exact keys win; otherwise the most similar key
/// is used when its similarity reaches `threshold`.
pub fn reinsert_strings_with(
    doc: &BpmnDocument,
    mapping: &BTreeMap<String, String>,
    threshold: f64,
    opts: &ExtractOptions,
) -> Reinsertion {
    let mut out = doc.clone();
    let mut warnings = opts.warnings();
    let mut replaced = 0;
    for s in extract_strings(doc, opts) {
        let Some(translated) = lookup(&s.value, mapping, threshold, &mut warnings) else {
            continue;
        };
        for loc in &s.locations {
            let Some(target) = element_at_mut(&mut out.root, &loc.path) else {
                continue;
            };
            match &loc.slot {
                TextSlot::Attribute(name) => target.set_attr(name, translated.clone()),
                TextSlot::Text => target.set_text(translated.clone()),
            }
            replaced += 1;
        }
    }
    Reinsertion {
        document: out,
        replaced,
        warnings,
    }
}

fn lookup(
    original: &str,
    mapping: &BTreeMap<String, String>,
    threshold: f64,
    warnings: &mut Vec<String>,
) -> Option<String> {
    let found = match mapping.get(original) {
        Some(v) => Some(v),
        None => {
            let mut best: Option<(&String, f64)> = None;
            for key in mapping.keys() {
                let score = fuzzy_similarity(original, key);
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((key, score));
                }
            }
            match best {
                Some((key, score)) if score >= threshold => mapping.get(key),
                Some((key, score)) => {
                    warnings.push(format!(
                        "no translation for {original:?}: closest key {key:?} has similarity {score:.3} < {threshold}"
                    ));
                    None
                }
                None => {
                    warnings.push(format!("no translation for {original:?}"));
                    None
                }
            }
        }
    }?;
    if found.trim().is_empty() {
        warnings.push(format!("empty translation for {original:?} ignored"));
        return None;
    }
    Some(found.clone())
}

fn element_at_mut<'a>(root: &'a mut Element, path: &[usize]) -> Option<&'a mut Element> {
    let mut cur = root;
    for &i in path {
        cur = match cur.children.get_mut(i)? {
            Node::Element(e) => e,
            _ => return None,
        };
    }
    Some(cur)
}
