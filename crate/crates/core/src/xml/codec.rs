use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::document::{Attribute, BpmnDocument, Element, Node, BPMN_MODEL_NS};
use super::XmlError;

type Scope = Vec<(Option<String>, String)>;

/// Parses a BPMN 2.0 file.
pub fn parse(bytes: &[u8]) -> Result<BpmnDocument, XmlError> {
    let (text, encoding) = decode(bytes)?;
    let base_scope: Scope = vec![(
        Some("xml".into()),
        "http://www.w3.org/XML/1998/namespace".into(),
    )];
    let (prolog, mut roots) = build(&text, &base_scope, false)?;
    if roots.len() != 1 {
        return Err(XmlError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected exactly one root element, found {}", roots.len()),
        });
    }
    let root = roots.remove(0);
    if !(root.namespace.as_deref() == Some(BPMN_MODEL_NS) && root.local_name() == "definitions") {
        return Err(XmlError::MissingBpmnNamespace {
            found: format!(
                "{} ({})",
                root.name,
                root.namespace.as_deref().unwrap_or("no namespace")
            ),
        });
    }
    Ok(BpmnDocument {
        root,
        prolog,
        encoding,
    })
}

/// Parses a sequence of elements (e.g. a repair snippet) in the namespace
/// scope of `doc`'s root element, so prefixes declared there resolve.
pub fn parse_fragment(doc: &BpmnDocument, xml: &str) -> Result<Vec<Element>, XmlError> {
    let mut scope: Scope = vec![(
        Some("xml".into()),
        "http://www.w3.org/XML/1998/namespace".into(),
    )];
    scope.extend(doc.root.namespace_declarations());
    let (_, elements) = build(xml, &scope, true)?;
    Ok(elements)
}

fn decode(bytes: &[u8]) -> Result<(String, String), XmlError> {
    if let Some(rest) = bytes.strip_prefix(&[0xEF, 0xBB, 0xBF]) {
        return utf8(rest).map(|s| (s, "UTF-8".to_owned()));
    }
    if bytes.starts_with(&[0xFF, 0xFE]) || bytes.starts_with(&[0xFE, 0xFF]) {
        let le = bytes[0] == 0xFF;
        let units: Vec<u16> = bytes[2..]
            .chunks_exact(2)
            .map(|c| {
                if le {
                    u16::from_le_bytes([c[0], c[1]])
                } else {
                    u16::from_be_bytes([c[0], c[1]])
                }
            })
            .collect();
        let text = String::from_utf16(&units).map_err(|_| XmlError::Syntax {
            line: 1,
            column: 1,
            message: "invalid UTF-16 content".into(),
        })?;
        return Ok((text, "UTF-16".to_owned()));
    }
    let declared = declared_encoding(bytes).unwrap_or_else(|| "UTF-8".to_owned());
    let lower = declared.to_ascii_lowercase();
    if matches!(
        lower.as_str(),
        "iso-8859-1" | "latin1" | "latin-1" | "windows-1252"
    ) {
        if let Ok(s) = std::str::from_utf8(bytes) {
            return Ok((s.to_owned(), declared));
        }
        return Ok((bytes.iter().map(|&b| b as char).collect(), declared));
    }
    utf8(bytes).map(|s| (s, declared))
}

fn utf8(bytes: &[u8]) -> Result<String, XmlError> {
    String::from_utf8(bytes.to_vec()).map_err(|e| {
        let (line, column) = line_col(&bytes[..e.utf8_error().valid_up_to()]);
        XmlError::Syntax {
            line,
            column,
            message: "invalid UTF-8 byte sequence".into(),
        }
    })
}

fn declared_encoding(bytes: &[u8]) -> Option<String> {
    let head = &bytes[..bytes.len().min(200)];
    let head = String::from_utf8_lossy(head);
    let decl_end = head.find("?>")?;
    let decl = &head[..decl_end];
    if !decl.trim_start().starts_with("<?xml") {
        return None;
    }
    let pos = decl.find("encoding")?;
    let rest = decl[pos + "encoding".len()..]
        .trim_start()
        .strip_prefix('=')?
        .trim_start();
    let quote = rest.chars().next()?;
    let rest = &rest[1..];
    let end = rest.find(quote)?;
    Some(rest[..end].to_owned())
}

fn line_col(consumed: &[u8]) -> (usize, usize) {
    let text = String::from_utf8_lossy(consumed);
    let line = text.matches('\n').count() + 1;
    let column = text
        .rsplit('\n')
        .next()
        .map(|l| l.chars().count())
        .unwrap_or(0)
        + 1;
    (line, column)
}

fn syntax_error(text: &str, offset: u64, message: impl Into<String>) -> XmlError {
    let offset = (offset as usize).min(text.len());
    let (line, column) = line_col(&text.as_bytes()[..offset]);
    XmlError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Frame {
    element: Element,
    declared: usize,
}

fn resolve(scope: &Scope, prefix: Option<&str>) -> Option<String> {
    scope
        .iter()
        .rev()
        .find(|(p, _)| p.as_deref() == prefix)
        .map(|(_, uri)| uri.clone())
        .filter(|uri| !uri.is_empty())
}

fn start_element(
    text: &str,
    reader: &Reader<&[u8]>,
    start: &BytesStart<'_>,
    scope: &mut Scope,
) -> Result<(Element, usize), XmlError> {
    let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
    let mut attributes = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| syntax_error(text, reader.buffer_position(), e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| syntax_error(text, reader.buffer_position(), e.to_string()))?
            .into_owned();
        attributes.push(Attribute { name: key, value });
    }
    let mut element = Element {
        name,
        namespace: None,
        attributes,
        children: Vec::new(),
    };
    let decls = element.namespace_declarations();
    let declared = decls.len();
    scope.extend(decls);
    if let Some(prefix) = element.prefix() {
        if prefix != "xmlns" && resolve(scope, Some(prefix)).is_none() {
            return Err(syntax_error(
                text,
                reader.buffer_position(),
                format!("undeclared namespace prefix `{prefix}`"),
            ));
        }
    }
    element.namespace = resolve(scope, element.prefix());
    Ok((element, declared))
}

fn push_text(children: &mut Vec<Node>, s: &str) {
    if let Some(Node::Text(last)) = children.last_mut() {
        last.push_str(s);
    } else {
        children.push(Node::Text(s.to_owned()));
    }
}

fn resolve_entity(name: &str) -> Option<char> {
    match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        _ => None,
    }
}

fn strip_whitespace_text(nodes: &mut Vec<Node>) {
    nodes.retain(|n| !matches!(n, Node::Text(t) if t.trim().is_empty()));
}

/// Builds elements from `text`. Returns (top-level non-element nodes, top-level elements).
fn build(text: &str, base: &Scope, fragment: bool) -> Result<(Vec<Node>, Vec<Element>), XmlError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;
    let mut scope: Scope = base.clone();
    let mut stack: Vec<Frame> = Vec::new();
    let mut top_nodes: Vec<Node> = Vec::new();
    let mut top_elements: Vec<Element> = Vec::new();

    let finish = |el: Element, stack: &mut Vec<Frame>, top: &mut Vec<Element>| {
        let mut el = el;
        // whitespace-only text next to markup is indentation
        let structural = el.children.iter().any(|n| !matches!(n, Node::Text(_)));
        if structural
            || el
                .children
                .iter()
                .all(|n| matches!(n, Node::Text(t) if t.trim().is_empty()))
        {
            strip_whitespace_text(&mut el.children);
        }
        match stack.last_mut() {
            Some(parent) => parent.element.children.push(Node::Element(el)),
            None => top.push(el),
        }
    };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| syntax_error(text, reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(start) => {
                let (element, declared) = start_element(text, &reader, &start, &mut scope)?;
                stack.push(Frame { element, declared });
            }
            Event::Empty(start) => {
                let (element, declared) = start_element(text, &reader, &start, &mut scope)?;
                scope.truncate(scope.len() - declared);
                finish(element, &mut stack, &mut top_elements);
            }
            Event::End(_) => {
                let frame = stack.pop().ok_or_else(|| {
                    syntax_error(text, reader.buffer_position(), "unexpected closing tag")
                })?;
                scope.truncate(scope.len() - frame.declared);
                finish(frame.element, &mut stack, &mut top_elements);
            }
            Event::Text(t) => {
                let s = t
                    .decode()
                    .map_err(|e| syntax_error(text, reader.buffer_position(), e.to_string()))?;
                match stack.last_mut() {
                    Some(frame) => push_text(&mut frame.element.children, &s),
                    None => {
                        if !s.trim().is_empty() && !fragment {
                            return Err(syntax_error(
                                text,
                                reader.buffer_position(),
                                "text outside the root element",
                            ));
                        }
                    }
                }
            }
            Event::GeneralRef(r) => {
                let c = if r.is_char_ref() {
                    r.resolve_char_ref()
                        .map_err(|e| syntax_error(text, reader.buffer_position(), e.to_string()))?
                } else {
                    let name = r
                        .decode()
                        .map_err(|e| syntax_error(text, reader.buffer_position(), e.to_string()))?;
                    resolve_entity(&name)
                };
                let c = c.ok_or_else(|| {
                    syntax_error(text, reader.buffer_position(), "unknown entity reference")
                })?;
                if let Some(frame) = stack.last_mut() {
                    let mut buf = [0u8; 4];
                    push_text(&mut frame.element.children, c.encode_utf8(&mut buf));
                }
            }
            Event::CData(c) => {
                let s = String::from_utf8_lossy(&c.into_inner()).into_owned();
                if let Some(frame) = stack.last_mut() {
                    frame.element.children.push(Node::CData(s));
                }
            }
            Event::Comment(c) => {
                let s = String::from_utf8_lossy(&c.into_inner()).into_owned();
                match stack.last_mut() {
                    Some(frame) => frame.element.children.push(Node::Comment(s)),
                    None if top_elements.is_empty() => top_nodes.push(Node::Comment(s)),
                    None => {}
                }
            }
            Event::PI(p) => {
                let s = String::from_utf8_lossy(&p.into_inner()).into_owned();
                match stack.last_mut() {
                    Some(frame) => frame.element.children.push(Node::ProcessingInstruction(s)),
                    None if top_elements.is_empty() => {
                        top_nodes.push(Node::ProcessingInstruction(s))
                    }
                    None => {}
                }
            }
            Event::Decl(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if let Some(frame) = stack.last() {
        return Err(syntax_error(
            text,
            text.len() as u64,
            format!(
                "unexpected end of input: `{}` is not closed",
                frame.element.name
            ),
        ));
    }
    Ok((top_nodes, top_elements))
}

/// Serializes to UTF-8 XML. Output is a pure function of the tree.
pub fn serialize(doc: &BpmnDocument) -> Vec<u8> {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for node in &doc.prolog {
        write_node(&mut out, node, 0, true);
        out.push('\n');
    }
    write_element(&mut out, &doc.root, 0, true);
    out.push('\n');
    out.into_bytes()
}

/// Serializes a single element without an XML declaration.
pub fn serialize_element(element: &Element) -> String {
    let mut out = String::new();
    write_element(&mut out, element, 0, true);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_node(out: &mut String, node: &Node, depth: usize, pretty: bool) {
    match node {
        Node::Element(e) => write_element(out, e, depth, pretty),
        Node::Text(t) => escape_into(out, t, false),
        Node::CData(c) => {
            out.push_str("<![CDATA[");
            out.push_str(&c.replace("]]>", "]]]]><![CDATA[>"));
            out.push_str("]]>");
        }
        Node::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
        Node::ProcessingInstruction(p) => {
            out.push_str("<?");
            out.push_str(p);
            out.push_str("?>");
        }
    }
}

fn write_element(out: &mut String, e: &Element, depth: usize, pretty: bool) {
    out.push('<');
    out.push_str(&e.name);
    for a in &e.attributes {
        out.push(' ');
        out.push_str(&a.name);
        out.push_str("=\"");
        escape_into(out, &a.value, true);
        out.push('"');
    }
    if e.children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    // mixed content is written inline so no whitespace is introduced
    let inline = !pretty || e.has_text();
    for child in &e.children {
        if !inline {
            out.push('\n');
            indent(out, depth + 1);
        }
        write_node(out, child, depth + 1, !inline);
    }
    if !inline {
        out.push('\n');
        indent(out, depth);
    }
    out.push_str("</");
    out.push_str(&e.name);
    out.push('>');
}

fn escape_into(out: &mut String, s: &str, attribute: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attribute => out.push_str("&quot;"),
            '\n' if attribute => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' if attribute => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
}
