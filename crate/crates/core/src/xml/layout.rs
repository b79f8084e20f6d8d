//! Deterministic layered layout producing BPMNDI for a model without diagram content.
//!
//! Flow nodes are layered by longest-path distance from the sources of the
//! sequence-flow graph (start events in a well-formed model) after back
//! edges found by DFS are ignored. Layers run left to right; nodes within a
//! layer stack top to bottom in document order. Data references sit on one
//! extra row below the flow.

use std::collections::VecDeque;

use super::di::{DetachedDiagram, DiagramInterchange};
use super::document::{BpmnDocument, Element, BPMNDI_NS, DC_NS, DI_NS};
use super::XmlError;
use crate::model::{build_graph, BpmnGraph, ElementCategory, GraphError};

pub const NODE_WIDTH: i64 = 100;
pub const NODE_HEIGHT: i64 = 80;
pub const GAP: i64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
}

impl Bounds {
    fn at(column: i64, row: i64) -> Self {
        Self {
            x: column * (NODE_WIDTH + GAP),
            y: row * (NODE_HEIGHT + GAP),
            width: NODE_WIDTH,
            height: NODE_HEIGHT,
        }
    }

    fn right_mid(&self) -> (i64, i64) {
        (self.x + self.width, self.y + self.height / 2)
    }

    fn left_mid(&self) -> (i64, i64) {
        (self.x, self.y + self.height / 2)
    }

    fn center(&self) -> (i64, i64) {
        (self.x + self.width / 2, self.y + self.height / 2)
    }
}

/// Computed positions, before conversion to XML.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout {
    /// (element id, bounds), flow nodes first in document order, then data references.
    pub shapes: Vec<(String, Bounds)>,
    /// (element id, waypoints)
    pub edges: Vec<(String, Vec<(i64, i64)>)>,
}

impl Layout {
    pub fn bounds(&self, id: &str) -> Option<Bounds> {
        self.shapes.iter().find(|(i, _)| i == id).map(|(_, b)| *b)
    }
}

fn is_drawable_data(tag: &str) -> bool {
    matches!(tag, "dataObjectReference" | "dataStoreReference")
}

/// Layer index per flow node (graph index order); `None` for non-flow nodes.
pub fn layers(g: &BpmnGraph) -> Vec<Option<usize>> {
    let n = g.node_count();
    let nodes = g.nodes();
    let flow: Vec<bool> = nodes.iter().map(|n| n.category.is_flow_node()).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        if e.tag != "sequenceFlow" && e.tag != crate::model::ATTACHMENT_TAG {
            continue;
        }
        if let (Some(s), Some(t)) = (g.index_of(&e.source), g.index_of(&e.target)) {
            if flow[s] && flow[t] {
                succ[s].push(t);
            }
        }
    }

    // DFS from start events first, then any remaining node, marking back edges
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut back: Vec<(usize, usize)> = Vec::new();
    let starts = (0..n).filter(|&i| flow[i] && nodes[i].tag == "startEvent");
    let rest = (0..n).filter(|&i| flow[i]);
    for root in starts.chain(rest) {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => back.push((v, w)),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }

    let mut indeg = vec![0usize; n];
    let mut forward: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &w in &succ[v] {
            if !back.contains(&(v, w)) {
                forward[v].push(w);
                indeg[w] += 1;
            }
        }
    }
    let mut layer: Vec<Option<usize>> = vec![None; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| flow[i] && indeg[i] == 0).collect();
    for &i in &queue {
        layer[i] = Some(0);
    }
    while let Some(v) = queue.pop_front() {
        let lv = layer[v].unwrap_or(0);
        for &w in &forward[v] {
            layer[w] = Some(layer[w].map_or(lv + 1, |lw| lw.max(lv + 1)));
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    layer
}

/// Computes shape bounds and edge waypoints for the document's flow.
pub fn compute_layout(doc: &BpmnDocument) -> Result<Layout, XmlError> {
    let graph = build_graph(doc)
        .map_err(|e| match e {
            GraphError::DocumentWithoutProcess => XmlError::DocumentWithoutProcess,
            other => XmlError::Syntax {
                line: 0,
                column: 0,
                message: other.to_string(),
            },
        })?
        .graph;
    let layer = layers(&graph);
    let nodes = graph.nodes();
    let mut rows_used: Vec<i64> = Vec::new();
    let mut bounds: Vec<Option<Bounds>> = vec![None; nodes.len()];
    let mut shapes = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if let Some(l) = layer[i] {
            if rows_used.len() <= l {
                rows_used.resize(l + 1, 0);
            }
            let b = Bounds::at(l as i64, rows_used[l]);
            rows_used[l] += 1;
            bounds[i] = Some(b);
            shapes.push((node.id.clone(), b));
        }
    }
    let data_row = rows_used.iter().copied().max().unwrap_or(0);
    let mut column = 0;
    for (i, node) in nodes.iter().enumerate() {
        if node.category == ElementCategory::Data && is_drawable_data(&node.tag) {
            let b = Bounds::at(column, data_row);
            column += 1;
            bounds[i] = Some(b);
            shapes.push((node.id.clone(), b));
        }
    }

    let mut edges = Vec::new();
    for e in graph.edges() {
        // synthesized ids ('#' is not valid in an XML id) have no semantic element to draw
        if e.id.contains('#') {
            continue;
        }
        let (Some(s), Some(t)) = (graph.index_of(&e.source), graph.index_of(&e.target)) else {
            continue;
        };
        let (Some(sb), Some(tb)) = (bounds[s], bounds[t]) else {
            continue;
        };
        let points = match e.tag.as_str() {
            "sequenceFlow" => {
                let start = sb.right_mid();
                let end = tb.left_mid();
                if start.1 == end.1 && start.0 <= end.0 {
                    vec![start, end]
                } else {
                    // single bend: across on the source row, then vertically into the target
                    let (cx, _) = tb.center();
                    let entry_y = if tb.y > sb.y { tb.y } else { tb.y + tb.height };
                    vec![start, (cx, start.1), (cx, entry_y)]
                }
            }
            "dataInputAssociation" | "dataOutputAssociation" | "association" => {
                vec![sb.center(), tb.center()]
            }
            _ => continue,
        };
        edges.push((e.id.clone(), points));
    }
    Ok(Layout { shapes, edges })
}

/// Builds a BPMNDI diagram for `doc` (which should carry no DI of its own).
pub fn auto_layout(doc: &BpmnDocument) -> Result<DiagramInterchange, XmlError> {
    let layout = compute_layout(doc)?;
    let name = |uri: &str, fallback: &str, local: &str| -> String {
        match doc.prefix_for(uri) {
            Some(Some(p)) => format!("{p}:{local}"),
            Some(None) => local.to_owned(),
            None => format!("{fallback}:{local}"),
        }
    };
    let plane_target = doc
        .root
        .child_elements()
        .find(|e| e.is_bpmn() && e.local_name() == "collaboration")
        .or_else(|| doc.processes().next())
        .and_then(|e| e.id())
        .unwrap_or_default()
        .to_owned();

    let mut plane = Element::new(name(BPMNDI_NS, "bpmndi", "BPMNPlane"), Some(BPMNDI_NS))
        .with_attr("id", "BPMNPlane_1")
        .with_attr("bpmnElement", plane_target);
    for (id, b) in &layout.shapes {
        let mut shape = Element::new(name(BPMNDI_NS, "bpmndi", "BPMNShape"), Some(BPMNDI_NS))
            .with_attr("id", format!("{id}_di"))
            .with_attr("bpmnElement", id.clone());
        if doc
            .find_by_id(id)
            .is_some_and(|e| e.local_name() == "exclusiveGateway")
        {
            shape.set_attr("isMarkerVisible", "true");
        }
        shape.push_child(
            Element::new(name(DC_NS, "dc", "Bounds"), Some(DC_NS))
                .with_attr("x", b.x.to_string())
                .with_attr("y", b.y.to_string())
                .with_attr("width", b.width.to_string())
                .with_attr("height", b.height.to_string()),
        );
        plane.push_child(shape);
    }
    for (id, points) in &layout.edges {
        let mut edge = Element::new(name(BPMNDI_NS, "bpmndi", "BPMNEdge"), Some(BPMNDI_NS))
            .with_attr("id", format!("{id}_di"))
            .with_attr("bpmnElement", id.clone());
        for (x, y) in points {
            edge.push_child(
                Element::new(name(DI_NS, "di", "waypoint"), Some(DI_NS))
                    .with_attr("x", x.to_string())
                    .with_attr("y", y.to_string()),
            );
        }
        plane.push_child(edge);
    }
    let mut diagram = Element::new(name(BPMNDI_NS, "bpmndi", "BPMNDiagram"), Some(BPMNDI_NS))
        .with_attr("id", "BPMNDiagram_1");
    diagram.push_child(plane);
    Ok(DiagramInterchange {
        diagrams: vec![DetachedDiagram {
            position: doc.root.children.len(),
            element: diagram,
        }],
    })
}
