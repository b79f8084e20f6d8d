use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::taxonomy::{categorize_element, ElementCategory};
use super::GraphError;
use crate::xml::{BpmnDocument, Element};

/// Tag used for the implicit host → boundary-event edge.
pub const ATTACHMENT_TAG: &str = "attachedToRef";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpmnNode {
    pub id: String,
    pub tag: String,
    pub label: String,
    pub category: ElementCategory,
}

impl BpmnNode {
    pub fn new(id: impl Into<String>, tag: impl Into<String>, label: impl Into<String>) -> Self {
        let tag = tag.into();
        Self {
            id: id.into(),
            category: categorize_element(&tag),
            tag,
            label: label.into(),
        }
    }

    /// The label, or the tag name for unlabeled nodes.
    pub fn display_label(&self) -> &str {
        if self.label.is_empty() {
            &self.tag
        } else {
            &self.label
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpmnEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub tag: String,
    pub condition: Option<String>,
    pub is_default: bool,
}

impl BpmnEdge {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        tag: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            tag: tag.into(),
            condition: None,
            is_default: false,
        }
    }
}

/// Directed multigraph over the flow and data elements of a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BpmnGraph {
    nodes: Vec<BpmnNode>,
    edges: Vec<BpmnEdge>,
    index: HashMap<String, usize>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
}

impl BpmnGraph {
    /// Builds a graph, rejecting duplicate node ids and dangling edges.
    pub fn new(nodes: Vec<BpmnNode>, edges: Vec<BpmnEdge>) -> Result<Self, GraphError> {
        let mut g = Self::default();
        for n in nodes {
            if n.id.is_empty() {
                return Err(GraphError::EmptyNodeId);
            }
            if g.index.contains_key(&n.id) {
                return Err(GraphError::DuplicateNode(n.id));
            }
            g.push_node(n);
        }
        for e in edges {
            if !g.index.contains_key(&e.source) {
                return Err(GraphError::DanglingEdge {
                    edge: e.id,
                    endpoint: e.source,
                });
            }
            if !g.index.contains_key(&e.target) {
                return Err(GraphError::DanglingEdge {
                    edge: e.id,
                    endpoint: e.target,
                });
            }
            g.push_edge(e);
        }
        Ok(g)
    }

    fn push_node(&mut self, n: BpmnNode) {
        self.index.insert(n.id.clone(), self.nodes.len());
        self.nodes.push(n);
        self.successors.push(Vec::new());
        self.predecessors.push(Vec::new());
    }

    fn push_edge(&mut self, mut e: BpmnEdge) {
        if e.is_default {
            e.condition = None;
        }
        let s = self.index[&e.source];
        let t = self.index[&e.target];
        self.successors[s].push(t);
        self.predecessors[t].push(s);
        self.edges.push(e);
    }

    pub fn nodes(&self) -> &[BpmnNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[BpmnEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&BpmnNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Successor node indices, one entry per outgoing edge.
    pub fn successors(&self, index: usize) -> &[usize] {
        &self.successors[index]
    }

    pub fn predecessors(&self, index: usize) -> &[usize] {
        &self.predecessors[index]
    }

    /// Total degree (in + out) of the node at `index`.
    pub fn degree(&self, index: usize) -> usize {
        self.successors[index].len() + self.predecessors[index].len()
    }

    /// Distinct adjacent node indices (predecessors ∪ successors), ascending.
    pub fn neighbors(&self, index: usize) -> BTreeSet<usize> {
        self.successors[index]
            .iter()
            .chain(&self.predecessors[index])
            .copied()
            .collect()
    }
}

/// Graph plus the edges that had to be dropped.
#[derive(Debug, Clone)]
pub struct GraphBuild {
    pub graph: BpmnGraph,
    pub warnings: Vec<String>,
}

/// Builds the graph view of a document. Diagram interchange content is
/// ignored; sub-process contents are flattened into the same graph.
pub fn build_graph(doc: &BpmnDocument) -> Result<GraphBuild, GraphError> {
    if !doc.has_process() {
        return Err(GraphError::DocumentWithoutProcess);
    }
    let mut defaults: HashMap<String, String> = HashMap::new();
    for e in doc.semantic_elements() {
        if let (Some(id), Some(d)) = (e.id(), e.attr("default")) {
            defaults.insert(id.to_owned(), d.to_owned());
        }
    }

    let mut graph = BpmnGraph::default();
    let mut pending: Vec<BpmnEdge> = Vec::new();
    let mut warnings = Vec::new();
    let mut synthetic = 0usize;
    for child in doc.root.child_elements() {
        walk(
            child,
            None,
            &mut graph,
            &mut pending,
            &mut warnings,
            &mut synthetic,
            &defaults,
        );
    }
    for e in pending {
        let missing = [&e.source, &e.target]
            .into_iter()
            .find(|end| !graph.index.contains_key(end.as_str()))
            .cloned();
        match missing {
            Some(end) => warnings.push(format!(
                "edge `{}` dropped: endpoint `{}` is not a node",
                e.id, end
            )),
            None => graph.push_edge(e),
        }
    }
    Ok(GraphBuild { graph, warnings })
}

fn normalize_label(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn walk(
    e: &Element,
    parent: Option<&str>,
    graph: &mut BpmnGraph,
    pending: &mut Vec<BpmnEdge>,
    warnings: &mut Vec<String>,
    synthetic: &mut usize,
    defaults: &HashMap<String, String>,
) {
    if e.is_bpmndi() {
        return;
    }
    let tag = e.local_name();
    let category = if e.is_bpmn() {
        categorize_element(tag)
    } else {
        ElementCategory::Other
    };
    if category.is_node() {
        match e.id() {
            Some(id) if !id.is_empty() => {
                if graph.index.contains_key(id) {
                    warnings.push(format!("duplicate node id `{id}` ignored"));
                } else {
                    graph.push_node(BpmnNode {
                        id: id.to_owned(),
                        tag: tag.to_owned(),
                        label: normalize_label(e.attr("name").unwrap_or("")),
                        category,
                    });
                    if tag == "boundaryEvent" {
                        if let Some(host) = e.attr("attachedToRef") {
                            pending.push(BpmnEdge::new(
                                format!("{id}#{ATTACHMENT_TAG}"),
                                host,
                                id,
                                ATTACHMENT_TAG,
                            ));
                        }
                    }
                }
            }
            _ => warnings.push(format!("`{tag}` element without id ignored")),
        }
    } else if category == ElementCategory::Flow {
        let mut next_id = |e: &Element| -> String {
            match e.id() {
                Some(id) if !id.is_empty() => id.to_owned(),
                _ => {
                    *synthetic += 1;
                    format!("{}#{}{}", parent.unwrap_or("flow"), tag, synthetic)
                }
            }
        };
        let edge = match tag {
            "dataInputAssociation" => {
                let source = e.child("sourceRef").map(|s| s.text().trim().to_owned());
                match (source, parent) {
                    (Some(source), Some(activity)) => {
                        Some(BpmnEdge::new(next_id(e), source, activity, tag))
                    }
                    _ => None,
                }
            }
            "dataOutputAssociation" => {
                let target = e.child("targetRef").map(|s| s.text().trim().to_owned());
                match (target, parent) {
                    (Some(target), Some(activity)) => {
                        Some(BpmnEdge::new(next_id(e), activity, target, tag))
                    }
                    _ => None,
                }
            }
            _ => match (e.attr("sourceRef"), e.attr("targetRef")) {
                (Some(s), Some(t)) => {
                    let mut edge = BpmnEdge::new(next_id(e), s, t, tag);
                    if tag == "sequenceFlow" {
                        edge.is_default =
                            defaults.get(s).map(String::as_str) == Some(edge.id.as_str());
                        edge.condition = e
                            .child("conditionExpression")
                            .map(|c| c.text().trim().to_owned())
                            .filter(|c| !c.is_empty());
                    }
                    Some(edge)
                }
                _ => None,
            },
        };
        match edge {
            Some(edge) => pending.push(edge),
            None => warnings.push(format!(
                "`{tag}` `{}` has no resolvable endpoints",
                e.id().unwrap_or("?")
            )),
        }
    }
    let here = if category.is_node() { e.id() } else { parent };
    for child in e.child_elements() {
        walk(child, here, graph, pending, warnings, synthetic, defaults);
    }
}
