//! Minimal owned XML tree used by every stage of the pipeline.
//!
//! Reading goes through `quick-xml`; writing is done here so that the
//! output layout is deterministic (two-space indentation, leaf text on one
//! line, attribute order preserved).

use std::fmt::Write as _;

use quick_xml::escape::{escape, partial_escape, unescape};
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

/// Namespace bound to the `m:` prefix in every volume file.
pub const MOTAMOT_NS: &str = "http://motamot.org/xml/volume";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed XML at line {line}, column {column}: {message}")]
pub struct XmlError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            name: name.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set_attr(key, value);
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        let text = text.into();
        if !text.is_empty() {
            self.children.push(Node::Text(text));
        }
        self
    }

    pub fn with_child(mut self, child: Element) -> Self {
        self.children.push(Node::Element(child));
        self
    }

    pub fn push(&mut self, child: Element) {
        self.children.push(Node::Element(child));
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_attr(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.attrs.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((key, value)),
        }
    }

    pub fn remove_attr(&mut self, key: &str) {
        self.attrs.retain(|(k, _)| k != key);
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn elements_mut(&mut self) -> impl Iterator<Item = &mut Element> {
        self.children.iter_mut().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.name == name)
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.elements().filter(move |e| e.name == name)
    }

    /// Concatenated direct text content.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    pub fn child_text(&self, name: &str) -> Option<String> {
        self.child(name).map(Element::text)
    }

    /// All elements reached by a `/`-separated path of child names.
    pub fn select<'a>(&'a self, path: &str) -> Vec<&'a Element> {
        let mut current = vec![self];
        for step in path.split('/').filter(|s| !s.is_empty()) {
            current = current
                .into_iter()
                .flat_map(|e| e.elements().filter(move |c| c.name == step))
                .collect();
        }
        current
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        write_element(&mut out, self, 0);
        out
    }
}

fn write_element(out: &mut String, el: &Element, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    out.push('<');
    out.push_str(&el.name);
    for (k, v) in &el.attrs {
        let _ = write!(out, " {}=\"{}\"", k, escape(v.as_str()));
    }
    let has_elements = el.elements().next().is_some();
    if el.children.is_empty() {
        if el.attrs.is_empty() {
            let _ = writeln!(out, "></{}>", el.name);
        } else {
            out.push_str(" />\n");
        }
        return;
    }
    if !has_elements {
        let _ = writeln!(out, ">{}</{}>", partial_escape(el.text().as_str()), el.name);
        return;
    }
    out.push_str(">\n");
    for child in &el.children {
        match child {
            Node::Element(e) => write_element(out, e, depth + 1),
            Node::Text(t) => {
                let _ = writeln!(out, "{}  {}", indent, partial_escape(t.as_str()));
            }
        }
    }
    let _ = writeln!(out, "{}</{}>", indent, el.name);
}

/// A parsed document: the root element plus any comments that preceded it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub prolog_comments: Vec<String>,
    pub root: Element,
}

impl Document {
    pub fn new(root: Element) -> Self {
        Document {
            prolog_comments: Vec::new(),
            root,
        }
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        for c in &self.prolog_comments {
            let _ = writeln!(out, "<!--{}-->", c);
        }
        out.push_str(&self.root.to_xml());
        out
    }
}

fn position(src: &str, offset: u64) -> (usize, usize) {
    let offset = (offset as usize).min(src.len());
    let before = &src.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = match before.iter().rposition(|&b| b == b'\n') {
        Some(nl) => offset - nl,
        None => offset + 1,
    };
    (line, column)
}

fn resolve_entity(name: &str) -> Option<&'static str> {
    Some(match name {
        "lt" => "<",
        "gt" => ">",
        "amp" => "&",
        "quot" => "\"",
        "apos" => "'",
        _ => return None,
    })
}

/// Parse a complete document. Whitespace-only text between elements is
/// dropped; text inside leaf elements is kept verbatim.
pub fn parse(src: &str) -> Result<Document, XmlError> {
    let mut reader = Reader::from_str(src);
    reader.config_mut().check_end_names = true;

    let err = |reader: &Reader<&[u8]>, message: String| {
        let (line, column) = position(src, reader.error_position().max(reader.buffer_position()));
        XmlError {
            line,
            column,
            message,
        }
    };

    let mut stack: Vec<Element> = Vec::new();
    let mut prolog_comments = Vec::new();
    let mut root: Option<Element> = None;
    let mut pending_text = String::new();

    fn flush_text(stack: &mut [Element], text: &mut String) {
        if text.is_empty() {
            return;
        }
        if let Some(top) = stack.last_mut() {
            if !text.trim().is_empty() {
                top.children.push(Node::Text(std::mem::take(text)));
            }
        }
        text.clear();
    }

    loop {
        let event = reader
            .read_event()
            .map_err(|e| err(&reader, e.to_string()))?;
        match event {
            Event::Start(start) | Event::Empty(start) if root.is_some() => {
                let _ = start;
                return Err(err(&reader, "content after the root element".into()));
            }
            Event::Start(start) => {
                flush_text(&mut stack, &mut pending_text);
                stack.push(start_element(&start).map_err(|m| err(&reader, m))?);
            }
            Event::Empty(start) => {
                flush_text(&mut stack, &mut pending_text);
                let el = start_element(&start).map_err(|m| err(&reader, m))?;
                match stack.last_mut() {
                    Some(top) => top.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                flush_text(&mut stack, &mut pending_text);
                let el = stack
                    .pop()
                    .ok_or_else(|| err(&reader, "unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(top) => top.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::Text(text) => {
                if stack.is_empty() {
                    if !text.xml10_content().trim().is_empty() {
                        return Err(err(&reader, "text outside the root element".into()));
                    }
                } else {
                    pending_text.push_str(&text.xml10_content());
                }
            }
            Event::CData(data) => {
                if stack.is_empty() {
                    return Err(err(&reader, "CDATA outside the root element".into()));
                }
                pending_text.push_str(&data);
            }
            Event::GeneralRef(r) => {
                if stack.is_empty() {
                    return Err(err(&reader, "reference outside the root element".into()));
                }
                let ch = r
                    .resolve_char_ref()
                    .map_err(|e| err(&reader, e.to_string()))?;
                match ch {
                    Some(c) => pending_text.push(c),
                    None => match resolve_entity(&r) {
                        Some(s) => pending_text.push_str(s),
                        None => {
                            return Err(err(&reader, format!("unknown entity &{};", &*r)));
                        }
                    },
                }
            }
            Event::Comment(c) => {
                if stack.is_empty() && root.is_none() {
                    prolog_comments.push(c.xml10_content().into_owned());
                }
            }
            Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(err(
            &reader,
            format!("unclosed element <{}>", stack[stack.len() - 1].name),
        ));
    }
    let root = root.ok_or_else(|| err(&reader, "document has no root element".into()))?;
    Ok(Document {
        prolog_comments,
        root,
    })
}

fn start_element(start: &quick_xml::events::BytesStart<'_>) -> Result<Element, String> {
    let name = start.name().as_ref().to_owned();
    let mut el = Element::new(name);
    for attr in start.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let key = attr.key.as_ref().to_owned();
        let value = unescape(&attr.value)
            .map_err(|e| e.to_string())?
            .into_owned();
        el.attrs.push((key, value));
    }
    Ok(el)
}

/// Differences between two trees: element names and order, attributes (in
/// any order) and trimmed text. Text of elements named in `free_text` is not
/// compared. Empty means structurally identical.
pub fn structural_diff(expected: &Element, actual: &Element, free_text: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    diff_at(expected, actual, free_text, &mut String::new(), &mut out);
    out
}

fn diff_at(e: &Element, a: &Element, free_text: &[&str], path: &mut String, out: &mut Vec<String>) {
    let len = path.len();
    path.push('/');
    path.push_str(&e.name);
    if e.name != a.name {
        out.push(format!("{path}: expected <{}>, found <{}>", e.name, a.name));
        path.truncate(len);
        return;
    }
    let mut ea = e.attrs.clone();
    let mut aa = a.attrs.clone();
    ea.sort();
    aa.sort();
    if ea != aa {
        out.push(format!("{path}: attributes {ea:?} != {aa:?}"));
    }
    if !free_text.contains(&e.name.as_str()) && e.text().trim() != a.text().trim() {
        out.push(format!(
            "{path}: text {:?} != {:?}",
            e.text().trim(),
            a.text().trim()
        ));
    }
    let ec: Vec<&Element> = e.elements().collect();
    let ac: Vec<&Element> = a.elements().collect();
    if ec.len() != ac.len() {
        out.push(format!(
            "{path}: {} children expected, found {}",
            ec.len(),
            ac.len()
        ));
    }
    for (x, y) in ec.iter().zip(&ac) {
        diff_at(x, y, free_text, path, out);
    }
    path.truncate(len);
}
