//! Detaching and re-attaching BPMNDI (diagram interchange) content.

use std::collections::{BTreeMap, BTreeSet};

use super::document::{BpmnDocument, Element, Node};

/// A BPMNDI subtree removed from `definitions`, with its former child index.
#[derive(Debug, Clone, PartialEq)]
pub struct DetachedDiagram {
    pub position: usize,
    pub element: Element,
}

/// Diagram content detached from a document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagramInterchange {
    pub diagrams: Vec<DetachedDiagram>,
}

impl DiagramInterchange {
    pub fn is_empty(&self) -> bool {
        self.diagrams.is_empty()
    }

    /// Map from DI shape/edge id (or its position when unnamed) to the semantic element id it draws.
    pub fn references(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let mut n = 0usize;
        for d in &self.diagrams {
            for e in d.element.descendants() {
                if is_drawing(e) {
                    if let Some(target) = e.attr("bpmnElement") {
                        let key = e.id().map(str::to_owned).unwrap_or_else(|| {
                            n += 1;
                            format!("#{n}")
                        });
                        out.insert(key, target.to_owned());
                    }
                }
            }
        }
        out
    }

    pub fn shape_count(&self) -> usize {
        self.diagrams
            .iter()
            .flat_map(|d| d.element.descendants())
            .filter(|e| is_drawing(e))
            .count()
    }
}

fn is_drawing(e: &Element) -> bool {
    e.is_bpmndi() && matches!(e.local_name(), "BPMNShape" | "BPMNEdge")
}

/// Removes every BPMNDI element from the document.
pub fn strip_di(doc: &BpmnDocument) -> (BpmnDocument, DiagramInterchange) {
    let mut out = doc.clone();
    let mut di = DiagramInterchange::default();
    let mut kept = Vec::with_capacity(out.root.children.len());
    for (i, node) in std::mem::take(&mut out.root.children)
        .into_iter()
        .enumerate()
    {
        match node {
            Node::Element(e) if e.is_bpmndi() => di.diagrams.push(DetachedDiagram {
                position: i,
                element: e,
            }),
            other => kept.push(other),
        }
    }
    out.root.children = kept;
    // nested DI is unusual; detach it too so the semantic tree is clean
    let end = doc.root.children.len();
    for e in out.root.child_elements_mut() {
        strip_nested(e, &mut di, end);
    }
    (out, di)
}

fn strip_nested(e: &mut Element, di: &mut DiagramInterchange, end: usize) {
    let mut kept = Vec::with_capacity(e.children.len());
    for node in std::mem::take(&mut e.children) {
        match node {
            Node::Element(child) if child.is_bpmndi() => di.diagrams.push(DetachedDiagram {
                position: end,
                element: child,
            }),
            other => kept.push(other),
        }
    }
    e.children = kept;
    for child in e.child_elements_mut() {
        strip_nested(child, di, end);
    }
}

#[derive(Debug, Clone)]
pub struct Reattached {
    pub document: BpmnDocument,
    /// Semantic ids whose shapes or edges were dropped because the element no longer exists.
    pub dropped: Vec<String>,
}

/// Puts diagram content back, discarding shapes and edges that point at
/// elements which no longer exist.
pub fn reattach_di(doc: &BpmnDocument, di: &DiagramInterchange) -> Reattached {
    let mut out = doc.clone();
    let ids: BTreeSet<String> = doc
        .semantic_elements()
        .into_iter()
        .filter_map(|e| e.id().map(str::to_owned))
        .collect();
    let mut dropped = Vec::new();
    // original indices, applied in ascending order, rebuild the original layout
    for d in &di.diagrams {
        let mut element = d.element.clone();
        prune(&mut element, &ids, &mut dropped);
        declare_prefixes(&mut out, &element);
        let pos = d.position.min(out.root.children.len());
        out.root.children.insert(pos, Node::Element(element));
    }
    Reattached {
        document: out,
        dropped,
    }
}

fn prune(e: &mut Element, ids: &BTreeSet<String>, dropped: &mut Vec<String>) {
    e.children.retain(|n| match n {
        Node::Element(child) if is_drawing(child) => match child.attr("bpmnElement") {
            Some(target) if !ids.contains(target) => {
                dropped.push(target.to_owned());
                false
            }
            _ => true,
        },
        _ => true,
    });
    for child in e.child_elements_mut() {
        prune(child, ids, dropped);
    }
}

/// Adds `xmlns:prefix` declarations to the root for any DI prefix that the
/// subtree uses but neither it nor the root declares.
fn declare_prefixes(doc: &mut BpmnDocument, subtree: &Element) {
    let mut needed: BTreeMap<String, String> = BTreeMap::new();
    collect_prefixes(subtree, &mut Vec::new(), &mut needed);
    let declared: BTreeSet<Option<String>> = doc
        .root
        .namespace_declarations()
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    for (prefix, uri) in needed {
        if !declared.contains(&Some(prefix.clone())) {
            doc.root.set_attr(&format!("xmlns:{prefix}"), uri);
        }
    }
}

fn collect_prefixes(
    e: &Element,
    scope: &mut Vec<Option<String>>,
    needed: &mut BTreeMap<String, String>,
) {
    let decls = e.namespace_declarations();
    let before = scope.len();
    scope.extend(decls.into_iter().map(|(p, _)| p));
    if let (Some(prefix), Some(uri)) = (e.prefix(), e.namespace.as_deref()) {
        if !scope.contains(&Some(prefix.to_owned())) {
            needed
                .entry(prefix.to_owned())
                .or_insert_with(|| uri.to_owned());
        }
    }
    for child in e.child_elements() {
        collect_prefixes(child, scope, needed);
    }
    scope.truncate(before);
}
