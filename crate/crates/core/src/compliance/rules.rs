use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{ComplianceReport, Diagnostic, RuleCode};
use crate::model::{categorize_element, ElementCategory};
use crate::xml::{self, BpmnDocument, Element, XmlError};

/// Validates raw file content; parse failures become `R5_WELLFORMED` errors.
pub fn validate_bytes(bytes: &[u8]) -> ComplianceReport {
    match xml::parse(bytes) {
        Ok(doc) => validate(&doc),
        Err(e) => {
            let message = match &e {
                XmlError::MissingBpmnNamespace { .. } => e.to_string(),
                _ => format!("not well-formed: {e}"),
            };
            ComplianceReport::from_diagnostics(vec![Diagnostic::error(
                RuleCode::WellFormed,
                None,
                message,
            )])
        }
    }
}

/// Applies all rules. Diagnostics are ordered by the document position of the
/// element they concern.
pub fn validate(doc: &BpmnDocument) -> ComplianceReport {
    let mut found: Vec<(usize, Diagnostic)> = Vec::new();
    let mut position = 0usize;
    let index = index_document(&doc.root, &mut position);

    check_ids(&index, &mut found);
    if !doc.has_process() {
        found.push((
            0,
            Diagnostic::error(RuleCode::StartEnd, None, "document contains no process"),
        ));
    }
    for process in &index.processes {
        check_process(process, &index, &mut found);
    }

    found.sort_by_key(|(pos, d)| (*pos, d.code));
    ComplianceReport::from_diagnostics(found.into_iter().map(|(_, d)| d).collect())
}

struct Indexed<'a> {
    element: &'a Element,
    position: usize,
}

#[derive(Default)]
struct ProcessIndex<'a> {
    process: Option<Indexed<'a>>,
    /// Flow nodes (task, gateway, event) at any depth, document order.
    flow_nodes: Vec<Indexed<'a>>,
    /// Direct children of the process that are start / end events.
    top_starts: usize,
    top_ends: usize,
    sequence_flows: Vec<Indexed<'a>>,
    data_objects: Vec<Indexed<'a>>,
    data_refs: Vec<Indexed<'a>>,
    data_stores: Vec<Indexed<'a>>,
    data_associations: Vec<Indexed<'a>>,
}

struct DocumentIndex<'a> {
    /// Every element carrying an `id`, in document order.
    ids: Vec<Indexed<'a>>,
    /// Flow nodes and sequence flows lacking an id.
    anonymous: Vec<Indexed<'a>>,
    processes: Vec<ProcessIndex<'a>>,
    /// Ids of item-aware elements anywhere in the model (data objects, stores, inputs, outputs, properties).
    item_ids: HashSet<&'a str>,
    data_store_ids: HashSet<&'a str>,
}

fn index_document<'a>(root: &'a Element, position: &mut usize) -> DocumentIndex<'a> {
    let mut index = DocumentIndex {
        ids: Vec::new(),
        anonymous: Vec::new(),
        processes: Vec::new(),
        item_ids: HashSet::new(),
        data_store_ids: HashSet::new(),
    };
    walk(root, position, &mut index, None);
    index
}

fn walk<'a>(
    e: &'a Element,
    position: &mut usize,
    index: &mut DocumentIndex<'a>,
    mut process: Option<usize>,
) {
    let pos = *position;
    *position += 1;
    if e.id().is_some() {
        index.ids.push(Indexed {
            element: e,
            position: pos,
        });
    }
    if e.is_bpmndi() {
        // ids inside DI still take part in the uniqueness check
        for child in e.child_elements() {
            walk(child, position, index, None);
        }
        return;
    }
    let tag = e.local_name();
    let category = if e.is_bpmn() {
        categorize_element(tag)
    } else {
        ElementCategory::Other
    };
    if e.is_bpmn() && tag == "process" {
        index.processes.push(ProcessIndex {
            process: Some(Indexed {
                element: e,
                position: pos,
            }),
            ..ProcessIndex::default()
        });
        process = Some(index.processes.len() - 1);
        for child in e.child_elements() {
            if child.is_bpmn() {
                match child.local_name() {
                    "startEvent" => index.processes[process.unwrap()].top_starts += 1,
                    "endEvent" => index.processes[process.unwrap()].top_ends += 1,
                    _ => {}
                }
            }
        }
    }
    if (category.is_flow_node() || (e.is_bpmn() && tag == "sequenceFlow")) && e.id().is_none() {
        index.anonymous.push(Indexed {
            element: e,
            position: pos,
        });
    }
    if e.is_bpmn() {
        match tag {
            "dataObject"
            | "dataInput"
            | "dataOutput"
            | "property"
            | "dataStore"
            | "dataObjectReference"
            | "dataStoreReference" => {
                if let Some(id) = e.id() {
                    index.item_ids.insert(id);
                }
            }
            _ => {}
        }
        if tag == "dataStore" {
            if let Some(id) = e.id() {
                index.data_store_ids.insert(id);
            }
        }
    }
    if let Some(p) = process {
        let entry = &mut index.processes[p];
        let item = || Indexed {
            element: e,
            position: pos,
        };
        if category.is_flow_node() && e.id().is_some() {
            entry.flow_nodes.push(item());
        }
        match tag {
            "sequenceFlow" if e.is_bpmn() => entry.sequence_flows.push(item()),
            "dataObject" if e.is_bpmn() => entry.data_objects.push(item()),
            "dataObjectReference" if e.is_bpmn() => entry.data_refs.push(item()),
            "dataStoreReference" if e.is_bpmn() => entry.data_stores.push(item()),
            "dataInputAssociation" | "dataOutputAssociation" if e.is_bpmn() => {
                entry.data_associations.push(item())
            }
            _ => {}
        }
    }
    for child in e.child_elements() {
        walk(child, position, index, process);
    }
}

fn check_ids(index: &DocumentIndex<'_>, found: &mut Vec<(usize, Diagnostic)>) {
    let mut seen: HashSet<&str> = HashSet::new();
    for item in &index.ids {
        let id = item.element.id().unwrap_or_default();
        if id.is_empty() {
            found.push((
                item.position,
                Diagnostic::error(
                    RuleCode::WellFormed,
                    None,
                    format!("`{}` has an empty id", item.element.local_name()),
                ),
            ));
        } else if !seen.insert(id) {
            found.push((
                item.position,
                Diagnostic::error(
                    RuleCode::WellFormed,
                    Some(id),
                    format!("id `{id}` is used by more than one element"),
                ),
            ));
        }
    }
    for item in &index.anonymous {
        found.push((
            item.position,
            Diagnostic::error(
                RuleCode::WellFormed,
                None,
                format!("`{}` element has no id", item.element.local_name()),
            ),
        ));
    }
}

fn condition_of(flow: &Element) -> Option<String> {
    flow.child("conditionExpression")
        .map(|c| c.text().trim().to_owned())
        .filter(|c| !c.is_empty())
}

fn link_name(e: &Element) -> Option<&str> {
    e.child("linkEventDefinition")
        .map(|l| l.attr("name").unwrap_or(""))
}

fn check_process(
    p: &ProcessIndex<'_>,
    index: &DocumentIndex<'_>,
    found: &mut Vec<(usize, Diagnostic)>,
) {
    let process = p.process.as_ref().expect("process entry");
    let pid = process.element.id();

    // R6
    if p.top_starts == 0 || p.top_ends == 0 {
        let missing = match (p.top_starts, p.top_ends) {
            (0, 0) => "process has neither a start event nor an end event",
            (0, _) => "process has no start event",
            _ => "process has no end event",
        };
        found.push((
            process.position,
            Diagnostic::error(RuleCode::StartEnd, pid, missing),
        ));
    }

    let nodes: HashMap<&str, &Indexed<'_>> = p
        .flow_nodes
        .iter()
        .filter_map(|n| n.element.id().map(|id| (id, n)))
        .collect();

    // R4: endpoint resolution
    let mut outgoing: HashMap<&str, Vec<&Indexed<'_>>> = HashMap::new();
    let mut succ: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut pred: HashMap<&str, Vec<&str>> = HashMap::new();
    for f in &p.sequence_flows {
        let fid = f.element.id();
        let source = f.element.attr("sourceRef");
        let target = f.element.attr("targetRef");
        let mut broken = Vec::new();
        for (role, end) in [("source", source), ("target", target)] {
            match end {
                None => broken.push(format!("has no {role}Ref")),
                Some(id) if !nodes.contains_key(id) => broken.push(format!(
                    "{role}Ref `{id}` is not a flow node of this process"
                )),
                _ => {}
            }
        }
        if !broken.is_empty() {
            found.push((
                f.position,
                Diagnostic::error(
                    RuleCode::Connectivity,
                    fid,
                    format!("sequence flow {}", broken.join(" and ")),
                ),
            ));
            continue;
        }
        let (s, t) = (source.unwrap(), target.unwrap());
        outgoing.entry(s).or_default().push(f);
        succ.entry(s).or_default().push(t);
        pred.entry(t).or_default().push(s);
    }
    for n in &p.flow_nodes {
        let el = n.element;
        if el.local_name() == "boundaryEvent" {
            if let (Some(host), Some(id)) = (el.attr("attachedToRef"), el.id()) {
                if let Some((&host, _)) = nodes.get_key_value(host) {
                    succ.entry(host).or_default().push(id);
                    pred.entry(id).or_default().push(host);
                }
            }
        }
    }
    // link events jump from throw to catch with the same name
    let catches: Vec<(&str, &str)> = p
        .flow_nodes
        .iter()
        .filter(|n| n.element.local_name() == "intermediateCatchEvent")
        .filter_map(|n| Some((link_name(n.element)?, n.element.id()?)))
        .collect();
    for n in &p.flow_nodes {
        if n.element.local_name() != "intermediateThrowEvent" {
            continue;
        }
        if let (Some(name), Some(id)) = (link_name(n.element), n.element.id()) {
            for &(cname, cid) in &catches {
                if cname == name {
                    succ.entry(id).or_default().push(cid);
                    pred.entry(cid).or_default().push(id);
                }
            }
        }
    }

    // R4: reachability
    let starts: Vec<&str> = p
        .flow_nodes
        .iter()
        .filter(|n| n.element.local_name() == "startEvent")
        .filter_map(|n| n.element.id())
        .collect();
    let ends: Vec<&str> = p
        .flow_nodes
        .iter()
        .filter(|n| n.element.local_name() == "endEvent")
        .filter_map(|n| n.element.id())
        .collect();
    let forward = (!starts.is_empty()).then(|| reach(&starts, &succ));
    let backward = (!ends.is_empty()).then(|| reach(&ends, &pred));
    for n in &p.flow_nodes {
        let id = n.element.id().unwrap_or_default();
        if n.element.attr("isForCompensation") == Some("true") {
            continue;
        }
        let unreachable = forward.as_ref().is_some_and(|r| !r.contains(id));
        let dead_end = backward.as_ref().is_some_and(|r| !r.contains(id));
        let problem = match (unreachable, dead_end) {
            (true, true) => {
                "is neither reachable from a start event nor able to reach an end event"
            }
            (true, false) => "is not reachable from any start event",
            (false, true) => "has no path to any end event",
            (false, false) => continue,
        };
        found.push((
            n.position,
            Diagnostic::error(
                RuleCode::Connectivity,
                Some(id),
                format!("{} `{id}` {problem}", n.element.local_name()),
            ),
        ));
    }

    // R1 / R2
    for n in &p.flow_nodes {
        let tag = n.element.local_name();
        let Some(gid) = n.element.id() else { continue };
        let exits = outgoing.get(gid).map(Vec::as_slice).unwrap_or(&[]);
        match tag {
            "exclusiveGateway" | "inclusiveGateway" if exits.len() >= 2 => {
                let default = n.element.attr("default").filter(|d| !d.is_empty());
                let exit_ids: Vec<&str> = exits.iter().filter_map(|f| f.element.id()).collect();
                if tag == "exclusiveGateway" {
                    match default {
                        None => found.push((
                            n.position,
                            Diagnostic::error(
                                RuleCode::DefaultFlow,
                                Some(gid),
                                format!(
                                    "exclusive gateway `{gid}` has {} outgoing flows but no default flow",
                                    exits.len()
                                ),
                            ),
                        )),
                        Some(d) if !exit_ids.contains(&d) => found.push((
                            n.position,
                            Diagnostic::error(
                                RuleCode::DefaultFlow,
                                Some(gid),
                                format!("default flow `{d}` is not an outgoing flow of `{gid}`"),
                            ),
                        )),
                        _ => {}
                    }
                }
                for f in exits {
                    let fid = f.element.id();
                    let is_default = default.is_some() && fid == default;
                    let condition = condition_of(f.element);
                    if is_default && condition.is_some() {
                        found.push((
                            f.position,
                            Diagnostic::warning(
                                RuleCode::ConditionExpression,
                                fid,
                                "default flow carries a condition expression, which is ignored",
                            ),
                        ));
                    } else if !is_default && condition.is_none() {
                        found.push((
                            f.position,
                            Diagnostic::error(
                                RuleCode::ConditionExpression,
                                fid,
                                format!(
                                    "non-default flow `{}` leaving {tag} `{gid}` has no condition expression",
                                    fid.unwrap_or("?")
                                ),
                            ),
                        ));
                    }
                }
            }
            "parallelGateway" => {
                for f in exits {
                    if condition_of(f.element).is_some() {
                        found.push((
                            f.position,
                            Diagnostic::warning(
                                RuleCode::ConditionExpression,
                                f.element.id(),
                                "condition on a parallel gateway exit is ignored",
                            ),
                        ));
                    }
                }
            }
            _ => {}
        }
    }

    // R3
    let declared: HashMap<&str, usize> = p
        .data_objects
        .iter()
        .filter_map(|d| d.element.id().map(|id| (id, d.position)))
        .collect();
    let mut first_reference: BTreeSet<&str> = BTreeSet::new();
    for r in &p.data_refs {
        let rid = r.element.id();
        match r.element.attr("dataObjectRef") {
            None => found.push((
                r.position,
                Diagnostic::error(
                    RuleCode::DataReferenceOrder,
                    rid,
                    "data object reference has no dataObjectRef",
                ),
            )),
            Some(target) => {
                match declared.get(target) {
                    None => found.push((
                        r.position,
                        Diagnostic::error(
                            RuleCode::DataReferenceOrder,
                            rid,
                            format!(
                                "referenced data object `{target}` is not declared in this process"
                            ),
                        ),
                    )),
                    Some(&decl) => {
                        if first_reference.insert(target) && decl > r.position {
                            found.push((
                            r.position,
                            Diagnostic::error(
                                RuleCode::DataReferenceOrder,
                                rid,
                                format!("data object `{target}` is declared after its first reference"),
                            ),
                        ));
                        }
                    }
                }
            }
        }
    }
    for s in &p.data_stores {
        if let Some(target) = s.element.attr("dataStoreRef") {
            if !index.data_store_ids.contains(target) {
                found.push((
                    s.position,
                    Diagnostic::error(
                        RuleCode::DataReferenceOrder,
                        s.element.id(),
                        format!("referenced data store `{target}` is not declared"),
                    ),
                ));
            }
        }
    }
    for a in &p.data_associations {
        let refs = a
            .element
            .child_elements()
            .filter(|c| matches!(c.local_name(), "sourceRef" | "targetRef"));
        for r in refs {
            let target = r.text();
            let target = target.trim();
            if !target.is_empty() && !index.item_ids.contains(target) {
                found.push((
                    a.position,
                    Diagnostic::warning(
                        RuleCode::DataReferenceOrder,
                        a.element.id(),
                        format!(
                            "data association {} `{target}` does not resolve",
                            r.local_name()
                        ),
                    ),
                ));
            }
        }
    }
}

fn reach<'a>(roots: &[&'a str], adjacency: &HashMap<&'a str, Vec<&'a str>>) -> HashSet<&'a str> {
    let mut seen: HashSet<&str> = roots.iter().copied().collect();
    let mut queue: VecDeque<&str> = roots.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &w in adjacency.get(v).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}
