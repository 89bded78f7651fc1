//! Vocables, lexies and axies, and their `m:` XML form.

use crate::xml::{Document, Element, MOTAMOT_NS};

use super::ids::{AxieId, EntryId};
use super::quality::QualityLevel;
use super::ModelError;

/// Review flag carried by generated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refine {
    #[default]
    No,
    Yes,
    Urgent,
}

impl Refine {
    fn attr(self) -> Option<&'static str> {
        match self {
            Refine::No => None,
            Refine::Yes => Some("true"),
            Refine::Urgent => Some("urgent"),
        }
    }

    fn parse(el: &Element) -> Result<Self, ModelError> {
        match el.attr("refine") {
            None | Some("false") | Some("") => Ok(Refine::No),
            Some("true") => Ok(Refine::Yes),
            Some("urgent") => Ok(Refine::Urgent),
            Some(other) => Err(schema(&el.name, format!("bad refine value {other:?}"))),
        }
    }
}

/// A note on a vocable saying one of its senses maps to some sense of another
/// vocable, without knowing which.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocableLink {
    pub target: EntryId,
    pub refine: Refine,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexie {
    pub sense_id: String,
    pub gloss: Option<String>,
    pub semantic_formula: Option<String>,
    pub domain: Option<String>,
    /// Embedded translations; only present before reification.
    pub translations: Vec<String>,
    pub axie_refs: Vec<AxieId>,
    pub examples: Vec<String>,
    pub idioms: Vec<String>,
    pub misc: Option<String>,
    pub level: Option<QualityLevel>,
    pub refine: Refine,
}

impl Lexie {
    pub fn new(index: usize) -> Self {
        Lexie {
            sense_id: sense_id(index),
            ..Default::default()
        }
    }
}

pub fn sense_id(index: usize) -> String {
    format!("s{index}")
}

/// 1-based position encoded in a sense id such as `s3`.
pub fn sense_index(sense_id: &str) -> Option<usize> {
    sense_id
        .strip_prefix('s')
        .filter(|n| !n.starts_with('0'))
        .and_then(|n| n.parse().ok())
        .filter(|&n| n >= 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocable {
    pub id: EntryId,
    pub headword: String,
    /// Headword in Khmer script, filled by transliteration for Khmer entries.
    pub writing: Option<String>,
    pub pronunciation: Option<String>,
    pub pos: Option<String>,
    pub fem_form: Option<String>,
    pub fem_pron: Option<String>,
    pub senses: Vec<Lexie>,
    pub pending_notes: Vec<VocableLink>,
    pub level: Option<QualityLevel>,
    pub revision: u64,
}

impl Vocable {
    pub fn new(id: EntryId) -> Self {
        Vocable {
            headword: id.headword().to_owned(),
            id,
            writing: None,
            pronunciation: None,
            pos: None,
            fem_form: None,
            fem_pron: None,
            senses: Vec::new(),
            pending_notes: Vec::new(),
            level: None,
            revision: 0,
        }
    }

    pub fn sense(&self, sense_id: &str) -> Option<&Lexie> {
        self.senses.iter().find(|s| s.sense_id == sense_id)
    }

    pub fn sense_mut(&mut self, sense_id: &str) -> Option<&mut Lexie> {
        self.senses.iter_mut().find(|s| s.sense_id == sense_id)
    }

    /// Key used when ordering a volume: the script form when there is one.
    pub fn sort_key(&self) -> &str {
        self.writing.as_deref().unwrap_or(&self.headword)
    }

    pub fn to_element(&self) -> Element {
        let mut entry = Element::new("m:entry")
            .with_attr("id", self.id.to_string())
            .with_attr("level", QualityLevel::attr(self.level));
        if self.revision > 0 {
            entry.set_attr("revision", self.revision.to_string());
        }
        let mut head = Element::new("m:head").with_child(leaf("m:headword", &self.headword));
        if let Some(w) = &self.writing {
            head.push(leaf("m:writing", w));
        }
        if let Some(p) = &self.pronunciation {
            head.push(leaf("m:pronunciation", p));
        }
        head.push(leaf("m:pos", self.pos.as_deref().unwrap_or("")));
        if let Some(f) = &self.fem_form {
            head.push(leaf("m:fem_form", f));
        }
        if let Some(f) = &self.fem_pron {
            head.push(leaf("m:fem_pron", f));
        }
        entry.push(head);
        for sense in &self.senses {
            entry.push(sense.to_element());
        }
        for note in &self.pending_notes {
            let mut el = Element::new("m:vocable-link").with_attr("idref", note.target.to_string());
            if let Some(r) = note.refine.attr() {
                el.set_attr("refine", r);
            }
            entry.push(el);
        }
        entry
    }

    pub fn from_element(el: &Element) -> Result<Self, ModelError> {
        expect_name(el, "m:entry")?;
        let id: EntryId = required_attr(el, "id")?.parse()?;
        let mut vocable = Vocable::new(id);
        vocable.level = QualityLevel::parse_attr(el.attr("level").unwrap_or(""))?;
        vocable.revision = match el.attr("revision") {
            None => 0,
            Some(r) => r
                .parse()
                .map_err(|_| schema("m:entry", format!("bad revision {r:?}")))?,
        };
        let mut saw_head = false;
        for child in el.elements() {
            match child.name.as_str() {
                "m:head" if !saw_head => {
                    saw_head = true;
                    read_head(child, &mut vocable)?;
                }
                "m:sense" => vocable.senses.push(Lexie::from_element(child)?),
                "m:vocable-link" => vocable.pending_notes.push(VocableLink {
                    target: required_attr(child, "idref")?.parse()?,
                    refine: Refine::parse(child)?,
                }),
                other => return Err(schema("m:entry", format!("unexpected element <{other}>"))),
            }
        }
        if !saw_head {
            return Err(schema("m:entry", "missing <m:head>".into()));
        }
        for (i, sense) in vocable.senses.iter().enumerate() {
            if sense.sense_id != sense_id(i + 1) {
                return Err(schema(
                    "m:sense",
                    format!(
                        "sense ids must be s1..sN in order, found {:?} at position {}",
                        sense.sense_id,
                        i + 1
                    ),
                ));
            }
        }
        Ok(vocable)
    }
}

fn read_head(head: &Element, v: &mut Vocable) -> Result<(), ModelError> {
    let mut headword = None;
    for child in head.elements() {
        let text = child.text();
        let slot = match child.name.as_str() {
            "m:headword" => &mut headword,
            "m:writing" => &mut v.writing,
            "m:pronunciation" => &mut v.pronunciation,
            "m:pos" => &mut v.pos,
            "m:fem_form" => &mut v.fem_form,
            "m:fem_pron" => &mut v.fem_pron,
            other => return Err(schema("m:head", format!("unexpected element <{other}>"))),
        };
        *slot = Some(text).filter(|t| !t.is_empty());
    }
    v.headword = headword.ok_or_else(|| schema("m:head", "missing <m:headword>".into()))?;
    Ok(())
}

impl Lexie {
    pub fn to_element(&self) -> Element {
        let mut el = Element::new("m:sense")
            .with_attr("id", self.sense_id.clone())
            .with_attr("level", QualityLevel::attr(self.level));
        if let Some(r) = self.refine.attr() {
            el.set_attr("refine", r);
        }
        if let Some(g) = &self.gloss {
            el.push(leaf("m:gloss", g));
        }
        if let Some(f) = &self.semantic_formula {
            el.push(leaf("m:formula", f));
        }
        if let Some(d) = &self.domain {
            el.push(leaf("m:domain", d));
        }
        if !self.translations.is_empty() {
            el.push(list("m:translations", "m:translation", &self.translations));
        }
        for axie in &self.axie_refs {
            el.push(Element::new("m:refaxie").with_attr("idrefaxie", axie.to_string()));
        }
        if !self.examples.is_empty() {
            el.push(list("m:examples", "m:example", &self.examples));
        }
        if !self.idioms.is_empty() {
            el.push(list("m:idioms", "m:idiom", &self.idioms));
        }
        if let Some(m) = &self.misc {
            el.push(leaf("m:misc", m));
        }
        el
    }

    pub fn from_element(el: &Element) -> Result<Self, ModelError> {
        expect_name(el, "m:sense")?;
        let mut lexie = Lexie {
            sense_id: required_attr(el, "id")?.to_owned(),
            level: QualityLevel::parse_attr(el.attr("level").unwrap_or(""))?,
            refine: Refine::parse(el)?,
            ..Default::default()
        };
        for child in el.elements() {
            match child.name.as_str() {
                "m:gloss" => lexie.gloss = Some(child.text()),
                "m:formula" => lexie.semantic_formula = Some(child.text()),
                "m:domain" => lexie.domain = Some(child.text()),
                "m:translations" => lexie.translations = read_list(child, "m:translation")?,
                "m:refaxie" | "m:reflexie" => {
                    let id = child
                        .attr("idrefaxie")
                        .or_else(|| child.attr("idref"))
                        .ok_or_else(|| schema(&child.name, "missing idrefaxie".into()))?;
                    lexie.axie_refs.push(id.parse()?);
                }
                "m:examples" => lexie.examples = read_list(child, "m:example")?,
                "m:idioms" => lexie.idioms = read_list(child, "m:idiom")?,
                "m:misc" => lexie.misc = Some(child.text()),
                other => return Err(schema("m:sense", format!("unexpected element <{other}>"))),
            }
        }
        let described = lexie.gloss.as_deref().is_some_and(|g| !g.is_empty())
            || lexie
                .semantic_formula
                .as_deref()
                .is_some_and(|f| !f.is_empty());
        if lexie.level.is_some_and(|l| l.stars() >= 2) && !described {
            return Err(schema(
                "m:sense",
                format!(
                    "sense {} at level >= 2 needs a gloss or formula",
                    lexie.sense_id
                ),
            ));
        }
        Ok(lexie)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxieRef {
    pub entry: EntryId,
    pub sense: Option<String>,
}

impl AxieRef {
    pub fn new(entry: EntryId, sense: Option<String>) -> Self {
        AxieRef { entry, sense }
    }

    pub fn volume(&self) -> &str {
        self.entry.lang()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axie {
    pub id: AxieId,
    pub refs: Vec<AxieRef>,
    pub level: Option<QualityLevel>,
    pub refine: Refine,
}

impl Axie {
    /// At least two refs, spanning at least two volumes.
    pub fn is_well_formed(&self) -> bool {
        let mut volumes: Vec<&str> = self.refs.iter().map(AxieRef::volume).collect();
        volumes.sort_unstable();
        volumes.dedup();
        self.refs.len() >= 2 && volumes.len() >= 2
    }

    pub fn to_element(&self) -> Element {
        let mut el = Element::new("m:axie")
            .with_attr("id", self.id.to_string())
            .with_attr("level", QualityLevel::attr(self.level));
        if let Some(r) = self.refine.attr() {
            el.set_attr("refine", r);
        }
        for r in &self.refs {
            let mut child = Element::new("m:reflexie").with_attr("idref", r.entry.to_string());
            if let Some(s) = &r.sense {
                child.set_attr("sense", s.clone());
            }
            el.push(child);
        }
        el
    }

    pub fn from_element(el: &Element) -> Result<Self, ModelError> {
        expect_name(el, "m:axie")?;
        let mut axie = Axie {
            id: required_attr(el, "id")?.parse()?,
            refs: Vec::new(),
            level: QualityLevel::parse_attr(el.attr("level").unwrap_or(""))?,
            refine: Refine::parse(el)?,
        };
        for child in el.elements() {
            match child.name.as_str() {
                "m:reflexie" | "m:refaxie" => axie.refs.push(AxieRef {
                    entry: required_attr(child, "idref")?.parse()?,
                    sense: child.attr("sense").map(str::to_owned),
                }),
                other => return Err(schema("m:axie", format!("unexpected element <{other}>"))),
            }
        }
        Ok(axie)
    }
}

/// A monolingual volume (French or Khmer entries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volume {
    pub name: String,
    pub lang: String,
    pub entries: Vec<Vocable>,
}

impl Volume {
    pub fn new(name: impl Into<String>, lang: impl Into<String>) -> Self {
        Volume {
            name: name.into(),
            lang: lang.into(),
            entries: Vec::new(),
        }
    }

    pub fn get(&self, id: &EntryId) -> Option<&Vocable> {
        self.entries.iter().find(|e| &e.id == id)
    }

    pub fn get_mut(&mut self, id: &EntryId) -> Option<&mut Vocable> {
        self.entries.iter_mut().find(|e| &e.id == id)
    }

    pub fn to_document(&self) -> Document {
        let mut root = volume_root(&self.name, &self.lang);
        for e in &self.entries {
            root.push(e.to_element());
        }
        Document::new(root)
    }

    pub fn from_document(doc: &Document) -> Result<Self, ModelError> {
        let (name, lang) = read_volume_root(&doc.root)?;
        let entries = doc
            .root
            .elements()
            .map(Vocable::from_element)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Volume {
            name,
            lang,
            entries,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxieVolume {
    pub name: String,
    pub axies: Vec<Axie>,
}

pub const AXIE_LANG: &str = "axi";

impl AxieVolume {
    pub fn new(name: impl Into<String>) -> Self {
        AxieVolume {
            name: name.into(),
            axies: Vec::new(),
        }
    }

    pub fn get(&self, id: &AxieId) -> Option<&Axie> {
        self.axies.iter().find(|a| &a.id == id)
    }

    pub fn to_document(&self) -> Document {
        let mut root = volume_root(&self.name, AXIE_LANG);
        for a in &self.axies {
            root.push(a.to_element());
        }
        Document::new(root)
    }

    pub fn from_document(doc: &Document) -> Result<Self, ModelError> {
        let (name, _) = read_volume_root(&doc.root)?;
        let axies = doc
            .root
            .elements()
            .map(Axie::from_element)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AxieVolume { name, axies })
    }
}

pub fn volume_root(name: &str, lang: &str) -> Element {
    Element::new("m:volume")
        .with_attr("xmlns:m", MOTAMOT_NS)
        .with_attr("name", name)
        .with_attr("lang", lang)
}

pub fn read_volume_root(root: &Element) -> Result<(String, String), ModelError> {
    expect_name(root, "m:volume")?;
    Ok((
        required_attr(root, "name")?.to_owned(),
        required_attr(root, "lang")?.to_owned(),
    ))
}

fn leaf(name: &str, text: &str) -> Element {
    Element::new(name).with_text(text)
}

fn list(outer: &str, inner: &str, items: &[String]) -> Element {
    let mut el = Element::new(outer);
    for item in items {
        el.push(leaf(inner, item));
    }
    el
}

fn read_list(el: &Element, item: &str) -> Result<Vec<String>, ModelError> {
    el.elements()
        .map(|c| {
            if c.name == item {
                Ok(c.text())
            } else {
                Err(schema(&el.name, format!("unexpected element <{}>", c.name)))
            }
        })
        .collect()
}

fn expect_name(el: &Element, name: &str) -> Result<(), ModelError> {
    if el.name == name {
        Ok(())
    } else {
        Err(schema(
            name,
            format!("expected <{name}>, found <{}>", el.name),
        ))
    }
}

fn required_attr<'a>(el: &'a Element, key: &str) -> Result<&'a str, ModelError> {
    el.attr(key)
        .ok_or_else(|| schema(&el.name, format!("missing attribute {key}")))
}

fn schema(element: &str, message: String) -> ModelError {
    ModelError::Schema {
        element: element.to_owned(),
        message,
    }
}
