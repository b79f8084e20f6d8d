//! In-memory XML tree for BPMN files.
//!
//! The tree keeps element order, attribute order, comments and processing
//! instructions. Whitespace-only text between elements is not kept; the
//! serializer re-indents element-only content instead.

use std::fmt;

pub const BPMN_MODEL_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";
pub const BPMNDI_NS: &str = "http://www.omg.org/spec/BPMN/20100524/DI";
pub const DC_NS: &str = "http://www.omg.org/spec/DD/20100524/DC";
pub const DI_NS: &str = "http://www.omg.org/spec/DD/20100524/DI";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    /// Qualified name as written in the source (`id`, `xsi:type`, ...).
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
    CData(String),
    Comment(String),
    ProcessingInstruction(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// Qualified name as written in the source, e.g. `bpmn:userTask`.
    pub name: String,
    /// Namespace URI resolved from the in-scope declarations.
    pub namespace: Option<String>,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(name: impl Into<String>, namespace: Option<&str>) -> Self {
        Self {
            name: name.into(),
            namespace: namespace.map(str::to_owned),
            attributes: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Name without the namespace prefix.
    pub fn local_name(&self) -> &str {
        match self.name.split_once(':') {
            Some((_, local)) => local,
            None => &self.name,
        }
    }

    pub fn prefix(&self) -> Option<&str> {
        self.name.split_once(':').map(|(p, _)| p)
    }

    pub fn is_bpmn(&self) -> bool {
        self.namespace.as_deref() == Some(BPMN_MODEL_NS)
    }

    pub fn is_bpmndi(&self) -> bool {
        self.namespace.as_deref() == Some(BPMNDI_NS)
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    pub fn id(&self) -> Option<&str> {
        self.attr("id")
    }

    /// Sets an attribute, keeping its position if it already exists.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attributes.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attributes.push(Attribute {
                name: name.to_owned(),
                value,
            }),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attributes.iter().position(|a| a.name == name)?;
        Some(self.attributes.remove(pos).value)
    }

    pub fn with_attr(mut self, name: &str, value: impl Into<String>) -> Self {
        self.set_attr(name, value);
        self
    }

    pub fn push_child(&mut self, child: Element) {
        self.children.push(Node::Element(child));
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    pub fn child_elements_mut(&mut self) -> impl Iterator<Item = &mut Element> {
        self.children.iter_mut().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    /// First child element with the given local name.
    pub fn child(&self, local: &str) -> Option<&Element> {
        self.child_elements().find(|e| e.local_name() == local)
    }

    /// Concatenated text and CDATA content of the direct children.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for n in &self.children {
            match n {
                Node::Text(t) | Node::CData(t) => out.push_str(t),
                _ => {}
            }
        }
        out
    }

    /// Replaces all text content with a single text node, keeping element children.
    pub fn set_text(&mut self, text: impl Into<String>) {
        self.children
            .retain(|n| !matches!(n, Node::Text(_) | Node::CData(_)));
        self.children.insert(0, Node::Text(text.into()));
    }

    pub fn has_text(&self) -> bool {
        self.children
            .iter()
            .any(|n| matches!(n, Node::Text(_) | Node::CData(_)))
    }

    /// Pre-order traversal over this element and all descendant elements.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    pub fn find_by_id(&self, id: &str) -> Option<&Element> {
        self.descendants().find(|e| e.id() == Some(id))
    }

    pub fn find_by_id_mut(&mut self, id: &str) -> Option<&mut Element> {
        if self.id() == Some(id) {
            return Some(self);
        }
        for child in self.child_elements_mut() {
            if let Some(found) = child.find_by_id_mut(id) {
                return Some(found);
            }
        }
        None
    }

    /// Removes the first descendant (not self) carrying `id` and returns it.
    pub fn remove_by_id(&mut self, id: &str) -> Option<Element> {
        let pos = self
            .children
            .iter()
            .position(|n| matches!(n, Node::Element(e) if e.id() == Some(id)));
        if let Some(pos) = pos {
            if let Node::Element(e) = self.children.remove(pos) {
                return Some(e);
            }
        }
        self.child_elements_mut()
            .find_map(|child| child.remove_by_id(id))
    }

    /// Replaces the first descendant carrying `id`. Returns the old element.
    pub fn replace_by_id(&mut self, id: &str, replacement: Element) -> Result<Element, Element> {
        let mut replacement = Some(replacement);
        let old = self.replace_inner(id, &mut replacement);
        match old {
            Some(e) => Ok(e),
            None => Err(replacement.expect("replacement unused")),
        }
    }

    fn replace_inner(&mut self, id: &str, replacement: &mut Option<Element>) -> Option<Element> {
        for node in self.children.iter_mut() {
            if let Node::Element(e) = node {
                if e.id() == Some(id) {
                    let new = replacement.take()?;
                    return Some(std::mem::replace(e, new));
                }
                if let Some(old) = e.replace_inner(id, replacement) {
                    return Some(old);
                }
            }
        }
        None
    }

    /// Namespace declarations made on this element, as (prefix, uri).
    pub fn namespace_declarations(&self) -> Vec<(Option<String>, String)> {
        self.attributes
            .iter()
            .filter_map(|a| {
                if a.name == "xmlns" {
                    Some((None, a.value.clone()))
                } else {
                    a.name
                        .strip_prefix("xmlns:")
                        .map(|p| (Some(p.to_owned()), a.value.clone()))
                }
            })
            .collect()
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a Element>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a Element;

    fn next(&mut self) -> Option<&'a Element> {
        let next = self.stack.pop()?;
        let children: Vec<&Element> = next.child_elements().collect();
        self.stack.extend(children.into_iter().rev());
        Some(next)
    }
}

/// A parsed `.bpmn` file.
#[derive(Debug, Clone)]
pub struct BpmnDocument {
    pub root: Element,
    /// Comments and processing instructions that precede the root element.
    pub prolog: Vec<Node>,
    /// Encoding declared (or detected) in the source. Output is always UTF-8.
    pub encoding: String,
}

impl PartialEq for BpmnDocument {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.prolog == other.prolog
    }
}

impl BpmnDocument {
    pub fn new(root: Element) -> Self {
        Self {
            root,
            prolog: Vec::new(),
            encoding: "UTF-8".to_owned(),
        }
    }

    /// All `process` elements directly under `definitions`.
    pub fn processes(&self) -> impl Iterator<Item = &Element> {
        self.root
            .child_elements()
            .filter(|e| e.is_bpmn() && e.local_name() == "process")
    }

    pub fn has_process(&self) -> bool {
        self.processes().next().is_some()
    }

    pub fn find_by_id(&self, id: &str) -> Option<&Element> {
        self.root.find_by_id(id)
    }

    pub fn find_by_id_mut(&mut self, id: &str) -> Option<&mut Element> {
        self.root.find_by_id_mut(id)
    }

    /// Every element of the semantic model, skipping diagram-interchange subtrees.
    pub fn semantic_elements(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(e) = stack.pop() {
            if e.is_bpmndi() {
                continue;
            }
            out.push(e);
            let children: Vec<&Element> = e.child_elements().collect();
            stack.extend(children.into_iter().rev());
        }
        out
    }

    /// Prefix bound to `uri` on the root element, if any.
    pub fn prefix_for(&self, uri: &str) -> Option<Option<String>> {
        self.root
            .namespace_declarations()
            .into_iter()
            .find(|(_, u)| u == uri)
            .map(|(p, _)| p)
    }

    /// Qualified name for a BPMN model element, using the root's prefix.
    pub fn bpmn_name(&self, local: &str) -> String {
        match self.prefix_for(BPMN_MODEL_NS) {
            Some(Some(p)) => format!("{p}:{local}"),
            _ => local.to_owned(),
        }
    }
}

impl fmt::Display for BpmnDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bytes = super::serialize(self);
        f.write_str(&String::from_utf8_lossy(&bytes))
    }
}
