//! One stored volume: its entries in document order plus field indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use crate::model::{read_volume_root, volume_root, Axie, Vocable, AXIE_LANG};
use crate::xml::{self, Document, Element};

use super::StoreError;

/// Reserved criteria: look an entry up by its id.
pub const HANDLE_CRITERIA: &str = "handle";

/// Element paths, relative to `m:entry`, that an index may cover.
pub const ENTRY_PATHS: &[&str] = &[
    "m:head/m:headword",
    "m:head/m:writing",
    "m:head/m:pronunciation",
    "m:head/m:pos",
    "m:head/m:fem_form",
    "m:head/m:fem_pron",
    "m:sense/m:gloss",
    "m:sense/m:formula",
    "m:sense/m:domain",
    "m:sense/m:translations/m:translation",
    "m:sense/m:examples/m:example",
    "m:sense/m:idioms/m:idiom",
    "m:sense/m:misc",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedField {
    pub criteria: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeDescriptor {
    /// Dictionary the volume belongs to.
    pub name: String,
    pub language: String,
    pub indexed_fields: Vec<IndexedField>,
}

impl VolumeDescriptor {
    /// Descriptor with the default `cdm-` fields; axie volumes index nothing
    /// but their ids.
    pub fn new(name: impl Into<String>, language: impl Into<String>) -> Self {
        let language = language.into();
        let indexed_fields = if language == AXIE_LANG {
            Vec::new()
        } else {
            [
                ("cdm-headword", "m:head/m:headword"),
                ("cdm-writing", "m:head/m:writing"),
                ("cdm-pronunciation", "m:head/m:pronunciation"),
                ("cdm-pos", "m:head/m:pos"),
                ("cdm-domain", "m:sense/m:domain"),
                ("cdm-example", "m:sense/m:examples/m:example"),
                ("cdm-idiom", "m:sense/m:idioms/m:idiom"),
                ("cdm-translation", "m:sense/m:translations/m:translation"),
            ]
            .into_iter()
            .map(|(c, p)| IndexedField {
                criteria: c.into(),
                path: p.into(),
            })
            .collect()
        };
        VolumeDescriptor {
            name: name.into(),
            language,
            indexed_fields,
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        let bad = |m: String| StoreError::InvalidDescriptor(m);
        if self.name.is_empty()
            || self.name.contains(['/', '\\', '*'])
            || self.name.starts_with('.')
        {
            return Err(bad(format!("bad dictionary name {:?}", self.name)));
        }
        if self.language.chars().count() != 3
            || !self.language.chars().all(|c| c.is_ascii_lowercase())
        {
            return Err(bad(format!(
                "language must be a 3-letter code, got {:?}",
                self.language
            )));
        }
        let mut seen = BTreeSet::new();
        for f in &self.indexed_fields {
            if f.criteria == HANDLE_CRITERIA || !seen.insert(f.criteria.as_str()) {
                return Err(bad(format!(
                    "criteria {:?} is reserved or repeated",
                    f.criteria
                )));
            }
            if !ENTRY_PATHS.contains(&f.path.as_str()) {
                return Err(bad(format!(
                    "path {:?} is not part of the entry schema",
                    f.path
                )));
            }
        }
        Ok(())
    }

    pub fn path_of(&self, criteria: &str) -> Option<&str> {
        self.indexed_fields
            .iter()
            .find(|f| f.criteria == criteria)
            .map(|f| f.path.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Exact,
    Prefix,
}

impl std::str::FromStr for Strategy {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, StoreError> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "prefix" => Ok(Strategy::Prefix),
            other => Err(StoreError::UnknownStrategy(other.to_owned())),
        }
    }
}

type Index = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone)]
pub(crate) struct StoredVolume {
    pub descriptor: VolumeDescriptor,
    pub volume_name: String,
    pub entries: Vec<Element>,
    positions: HashMap<String, usize>,
    ids: BTreeSet<String>,
    indexes: BTreeMap<String, Index>,
    sort_keys: HashMap<String, String>,
}

/// Texts an entry contributes to the index at `path`; empty texts are not indexed.
pub fn field_values(entry: &Element, path: &str) -> Vec<String> {
    entry
        .select(path)
        .into_iter()
        .map(Element::text)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Ordering key of an entry: script form, else headword, else id.
pub fn sort_key(entry: &Element) -> String {
    let first = |p: &str| field_values(entry, p).into_iter().next();
    first("m:head/m:writing")
        .or_else(|| first("m:head/m:headword"))
        .unwrap_or_else(|| entry.attr("id").unwrap_or_default().to_owned())
}

/// Check an entry against the typed model of its volume.
pub fn validate_entry(lang: &str, entry: &Element) -> Result<(), StoreError> {
    let result = if lang == AXIE_LANG {
        Axie::from_element(entry).map(|_| ())
    } else {
        Vocable::from_element(entry).and_then(|v| {
            if v.id.lang() == lang {
                Ok(())
            } else {
                Err(crate::model::ModelError::InvalidInput(format!(
                    "entry {} does not belong to a {lang} volume",
                    v.id
                )))
            }
        })
    };
    result.map_err(|e| StoreError::Schema(e.to_string()))
}

impl StoredVolume {
    pub fn empty(descriptor: VolumeDescriptor, volume_name: String) -> Self {
        StoredVolume {
            indexes: descriptor
                .indexed_fields
                .iter()
                .map(|f| (f.criteria.clone(), Index::new()))
                .collect(),
            descriptor,
            volume_name,
            entries: Vec::new(),
            positions: HashMap::new(),
            ids: BTreeSet::new(),
            sort_keys: HashMap::new(),
        }
    }

    pub fn from_xml(src: &str, descriptor: VolumeDescriptor) -> Result<Self, StoreError> {
        descriptor.validate()?;
        let doc = xml::parse(src)?;
        let (name, lang) =
            read_volume_root(&doc.root).map_err(|e| StoreError::Schema(e.to_string()))?;
        if lang != descriptor.language {
            return Err(StoreError::Schema(format!(
                "volume language {lang:?} differs from descriptor language {:?}",
                descriptor.language
            )));
        }
        let mut volume = StoredVolume::empty(descriptor, name);
        for entry in doc.root.elements() {
            validate_entry(&lang, entry)?;
            let id = entry.attr("id").unwrap_or_default().to_owned();
            if volume.positions.contains_key(&id) {
                return Err(StoreError::DuplicateId(id));
            }
            volume.insert(entry.clone());
        }
        Ok(volume)
    }

    fn insert(&mut self, entry: Element) {
        let id = entry.attr("id").unwrap_or_default().to_owned();
        self.add_to_indexes(&id, &entry);
        self.positions.insert(id.clone(), self.entries.len());
        self.ids.insert(id);
        self.entries.push(entry);
    }

    fn add_to_indexes(&mut self, id: &str, entry: &Element) {
        for f in &self.descriptor.indexed_fields {
            let index = self.indexes.entry(f.criteria.clone()).or_default();
            for value in field_values(entry, &f.path) {
                index.entry(value).or_default().insert(id.to_owned());
            }
        }
        self.sort_keys.insert(id.to_owned(), sort_key(entry));
    }

    fn remove_from_indexes(&mut self, id: &str, entry: &Element) {
        for f in &self.descriptor.indexed_fields {
            if let Some(index) = self.indexes.get_mut(&f.criteria) {
                for value in field_values(entry, &f.path) {
                    if let Some(ids) = index.get_mut(&value) {
                        ids.remove(id);
                        if ids.is_empty() {
                            index.remove(&value);
                        }
                    }
                }
            }
        }
        self.sort_keys.remove(id);
    }

    pub fn get(&self, id: &str) -> Option<&Element> {
        self.positions.get(id).map(|&i| &self.entries[i])
    }

    pub fn replace(&mut self, entry: Element) -> Result<(), StoreError> {
        let id = entry.attr("id").unwrap_or_default().to_owned();
        let pos = *self
            .positions
            .get(&id)
            .ok_or_else(|| StoreError::NotFound(id.clone()))?;
        let old = std::mem::replace(&mut self.entries[pos], entry);
        self.remove_from_indexes(&id, &old);
        let new = self.entries[pos].clone();
        self.add_to_indexes(&id, &new);
        Ok(())
    }

    pub fn upsert(&mut self, entry: Element) {
        let id = entry.attr("id").unwrap_or_default();
        if self.positions.contains_key(id) {
            let _ = self.replace(entry);
        } else {
            self.insert(entry);
        }
    }

    pub fn is_indexed(&self, criteria: &str) -> bool {
        criteria == HANDLE_CRITERIA || self.indexes.contains_key(criteria)
    }

    /// Matching ids in result order (sort key, then id).
    pub fn matching(
        &self,
        criteria: &str,
        value: &str,
        strategy: Strategy,
    ) -> Result<Vec<String>, StoreError> {
        let mut found: BTreeSet<&String> = BTreeSet::new();
        if criteria == HANDLE_CRITERIA {
            match strategy {
                Strategy::Exact => found.extend(self.ids.get(value)),
                Strategy::Prefix => found.extend(
                    self.ids
                        .range::<str, _>((Bound::Included(value), Bound::Unbounded))
                        .take_while(|id| id.starts_with(value)),
                ),
            }
        } else {
            let index = self
                .indexes
                .get(criteria)
                .ok_or_else(|| StoreError::UnknownCriteria(criteria.to_owned()))?;
            match strategy {
                Strategy::Exact => found.extend(index.get(value).into_iter().flatten()),
                Strategy::Prefix => {
                    for (_, ids) in index
                        .range::<str, _>((Bound::Included(value), Bound::Unbounded))
                        .take_while(|(k, _)| k.starts_with(value))
                    {
                        found.extend(ids);
                    }
                }
            }
        }
        let mut ids: Vec<String> = found.into_iter().cloned().collect();
        ids.sort_by(|a, b| {
            self.sort_keys[a]
                .cmp(&self.sort_keys[b])
                .then_with(|| a.cmp(b))
        });
        Ok(ids)
    }

    pub fn index_size(&self, criteria: &str) -> Option<usize> {
        self.indexes.get(criteria).map(BTreeMap::len)
    }

    pub fn to_document(&self, prolog: &[String]) -> Document {
        let mut root = volume_root(&self.volume_name, &self.descriptor.language);
        for e in &self.entries {
            root.push(e.clone());
        }
        Document {
            prolog_comments: prolog.to_vec(),
            root,
        }
    }

    pub fn sidecar(&self) -> Result<String, StoreError> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            descriptor: &'a VolumeDescriptor,
            indexes: &'a BTreeMap<String, Index>,
        }
        Ok(serde_json::to_string_pretty(&Sidecar {
            descriptor: &self.descriptor,
            indexes: &self.indexes,
        })?)
    }
}

/// Read the descriptor back from a sidecar; the indexes in it are rebuilt, not trusted.
pub fn descriptor_from_sidecar(json: &str) -> Result<VolumeDescriptor, StoreError> {
    #[derive(Deserialize)]
    struct Sidecar {
        descriptor: VolumeDescriptor,
    }
    Ok(serde_json::from_str::<Sidecar>(json)?.descriptor)
}
