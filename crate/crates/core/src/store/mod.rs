//! Indexed persistence for volumes, with optimistic revisions on edits.
//!
//! Readers take a shared lock on one volume; edits take its exclusive lock,
//! so a reader never sees half an edit. Link creation locks the volumes it
//! touches in key order.

mod backend;
mod volume;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use thiserror::Error;

pub use backend::{Backend, DirBackend, MemoryBackend, SavedVolume};
pub use volume::{
    field_values, sort_key, IndexedField, Strategy, VolumeDescriptor, ENTRY_PATHS, HANDLE_CRITERIA,
};
use volume::{validate_entry, StoredVolume};

use crate::model::{
    add_translation_link, revised_level, AxieVolume, Contributor, LinkOutcome, LinkRequest,
    ModelError, QualityLevel, Vocable, Volume, VolumeSet, AXIE_LANG,
};
use crate::xml::{self, Document, Element, XmlError};

/// Comment placed at the top of every export.
pub const LICENSE_COMMENT: &str =
    " Exported under the Creative Commons Attribution 4.0 International licence (CC BY 4.0). ";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("duplicate entry id {0}")]
    DuplicateId(String),
    #[error("invalid volume descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("no volume {0}")]
    UnknownVolume(String),
    #[error("no dictionary {0}")]
    UnknownDictionary(String),
    #[error("unknown criteria {0}")]
    UnknownCriteria(String),
    #[error("unknown strategy {0}")]
    UnknownStrategy(String),
    #[error("no entry {0}")]
    NotFound(String),
    #[error("revision conflict on {id}: expected {expected}, stored {actual}")]
    Conflict {
        id: String,
        expected: u64,
        actual: u64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

impl From<ModelError> for StoreError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotFound(m) => StoreError::NotFound(m),
            ModelError::InvalidInput(m) | ModelError::InvalidId(m) => StoreError::InvalidInput(m),
            e @ ModelError::Schema { .. } => StoreError::Schema(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VolumeHandle {
    pub dict: String,
    pub lang: String,
}

impl VolumeHandle {
    pub fn new(dict: impl Into<String>, lang: impl Into<String>) -> Self {
        VolumeHandle {
            dict: dict.into(),
            lang: lang.into(),
        }
    }
}

impl std::fmt::Display for VolumeHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.dict, self.lang)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub criteria: String,
    pub value: String,
    pub strategy: Strategy,
    pub count: usize,
    pub start: usize,
}

impl Query {
    pub fn new(criteria: impl Into<String>, value: impl Into<String>) -> Self {
        Query {
            criteria: criteria.into(),
            value: value.into(),
            strategy: Strategy::Exact,
            count: 10,
            start: 0,
        }
    }

    pub fn prefix(mut self) -> Self {
        self.strategy = Strategy::Prefix;
        self
    }

    pub fn window(mut self, start: usize, count: usize) -> Self {
        self.start = start;
        self.count = count;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    /// Matches before windowing.
    pub total: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupHit {
    pub volume: VolumeHandle,
    pub id: String,
    pub entry: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lookup {
    pub total: usize,
    pub start: usize,
    pub hits: Vec<LookupHit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyValue {
    pub entry: String,
    pub key: String,
    pub value: String,
}

type Shared = Arc<RwLock<StoredVolume>>;

fn read(v: &Shared) -> RwLockReadGuard<'_, StoredVolume> {
    v.read().unwrap_or_else(|p| p.into_inner())
}

fn write(v: &Shared) -> RwLockWriteGuard<'_, StoredVolume> {
    v.write().unwrap_or_else(|p| p.into_inner())
}

fn revision_of(entry: &Element) -> u64 {
    entry
        .attr("revision")
        .and_then(|r| r.parse().ok())
        .unwrap_or(0)
}

fn matches_pattern(pattern: &str, value: &str) -> bool {
    pattern == "*" || pattern == value
}

pub struct Store {
    backend: Box<dyn Backend>,
    volumes: RwLock<BTreeMap<VolumeHandle, Shared>>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store {
            backend: Box::new(MemoryBackend::default()),
            volumes: RwLock::new(BTreeMap::new()),
        }
    }

    /// Load every volume the backend holds, rebuilding indexes.
    pub fn open(backend: impl Backend + 'static) -> Result<Self, StoreError> {
        let mut volumes = BTreeMap::new();
        for saved in backend.load_all()? {
            let v = StoredVolume::from_xml(&saved.xml, saved.descriptor)?;
            let handle = VolumeHandle::new(&v.descriptor.name, &v.descriptor.language);
            volumes.insert(handle, Arc::new(RwLock::new(v)));
        }
        Ok(Store {
            backend: Box::new(backend),
            volumes: RwLock::new(volumes),
        })
    }

    pub fn open_dir(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        Self::open(DirBackend::new(path)?)
    }

    fn volume(&self, handle: &VolumeHandle) -> Result<Shared, StoreError> {
        self.volumes
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(handle)
            .cloned()
            .ok_or_else(|| StoreError::UnknownVolume(handle.to_string()))
    }

    fn persist(&self, v: &StoredVolume) -> Result<(), StoreError> {
        let xml = v.to_document(&[LICENSE_COMMENT.to_owned()]).to_xml();
        self.backend.save(&v.descriptor, &xml, &v.sidecar()?)
    }

    pub fn handles(&self) -> Vec<VolumeHandle> {
        self.volumes
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .keys()
            .cloned()
            .collect()
    }

    /// Replace or create a volume. Nothing changes unless the whole volume is valid.
    pub fn import_volume(
        &self,
        xml: &str,
        descriptor: VolumeDescriptor,
    ) -> Result<VolumeHandle, StoreError> {
        let v = StoredVolume::from_xml(xml, descriptor)?;
        let handle = VolumeHandle::new(&v.descriptor.name, &v.descriptor.language);
        self.persist(&v)?;
        self.volumes
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(handle.clone(), Arc::new(RwLock::new(v)));
        Ok(handle)
    }

    pub fn descriptor(&self, handle: &VolumeHandle) -> Result<VolumeDescriptor, StoreError> {
        Ok(read(&self.volume(handle)?).descriptor.clone())
    }

    pub fn entry(&self, handle: &VolumeHandle, id: &str) -> Result<Element, StoreError> {
        read(&self.volume(handle)?)
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))
    }

    /// All entries in document order.
    pub fn entries(&self, handle: &VolumeHandle) -> Result<Vec<Element>, StoreError> {
        Ok(read(&self.volume(handle)?).entries.clone())
    }

    pub fn index_size(&self, handle: &VolumeHandle, criteria: &str) -> Result<usize, StoreError> {
        read(&self.volume(handle)?)
            .index_size(criteria)
            .ok_or_else(|| StoreError::UnknownCriteria(criteria.to_owned()))
    }

    pub fn query(&self, handle: &VolumeHandle, q: &Query) -> Result<QueryResult, StoreError> {
        let ids = read(&self.volume(handle)?).matching(&q.criteria, &q.value, q.strategy)?;
        Ok(QueryResult {
            total: ids.len(),
            ids: ids.into_iter().skip(q.start).take(q.count).collect(),
        })
    }

    /// Replace an entry written against `expected_revision`. The stored level
    /// becomes the revised level for `contributor`; the revision goes up by one.
    pub fn update_entry(
        &self,
        handle: &VolumeHandle,
        id: &str,
        new_xml: &str,
        contributor: &Contributor,
        expected_revision: u64,
    ) -> Result<u64, StoreError> {
        let mut entry = xml::parse(new_xml)
            .map_err(|e| StoreError::Schema(e.to_string()))?
            .root;
        match entry.attr("id") {
            Some(given) if given != id => {
                return Err(StoreError::Schema(format!(
                    "body is entry {given}, not {id}"
                )));
            }
            Some(_) => {}
            None => entry.set_attr("id", id),
        }
        validate_entry(&handle.lang, &entry)?;

        let vol = self.volume(handle)?;
        let mut guard = write(&vol);
        let stored = guard
            .get(id)
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))?;
        let actual = revision_of(stored);
        if actual != expected_revision {
            return Err(StoreError::Conflict {
                id: id.to_owned(),
                expected: expected_revision,
                actual,
            });
        }
        let current = QualityLevel::parse_attr(stored.attr("level").unwrap_or(""))?;
        let revision = actual + 1;
        entry.set_attr("level", revised_level(current, contributor).to_string());
        entry.set_attr("revision", revision.to_string());
        guard.replace(entry)?;
        self.persist(&guard)?;
        Ok(revision)
    }

    pub fn export_volume(&self, handle: &VolumeHandle) -> Result<String, StoreError> {
        Ok(read(&self.volume(handle)?)
            .to_document(&[LICENSE_COMMENT.to_owned()])
            .to_xml())
    }

    /// Every volume of a dictionary under one `m:dictionary` root.
    pub fn export_dictionary(&self, dict: &str) -> Result<String, StoreError> {
        let handles: Vec<VolumeHandle> = self
            .handles()
            .into_iter()
            .filter(|h| h.dict == dict)
            .collect();
        if handles.is_empty() {
            return Err(StoreError::UnknownDictionary(dict.to_owned()));
        }
        let mut root = Element::new("m:dictionary")
            .with_attr("xmlns:m", xml::MOTAMOT_NS)
            .with_attr("name", dict);
        for h in handles {
            let mut v = read(&self.volume(&h)?).to_document(&[]).root;
            v.remove_attr("xmlns:m");
            root.push(v);
        }
        Ok(Document {
            prolog_comments: vec![LICENSE_COMMENT.to_owned()],
            root,
        }
        .to_xml())
    }

    /// Run a link request against the stored volumes of `dict`. The axie
    /// volume is created if the dictionary has none yet.
    pub fn create_link(&self, dict: &str, req: &LinkRequest) -> Result<LinkOutcome, StoreError> {
        let src = VolumeHandle::new(dict, req.source.entry.lang());
        let dst = VolumeHandle::new(dict, req.target.entry.lang());
        let axi = VolumeHandle::new(dict, AXIE_LANG);
        if src == dst {
            return Err(StoreError::InvalidInput(
                "cannot link two entries of the same volume".into(),
            ));
        }
        if src.lang == AXIE_LANG || dst.lang == AXIE_LANG {
            return Err(StoreError::InvalidInput(
                "links join entries, not axies".into(),
            ));
        }
        {
            let mut all = self.volumes.write().unwrap_or_else(|p| p.into_inner());
            if !all.contains_key(&src) || !all.contains_key(&dst) {
                let missing = if all.contains_key(&src) { &dst } else { &src };
                return Err(StoreError::UnknownVolume(missing.to_string()));
            }
            all.entry(axi.clone()).or_insert_with(|| {
                Arc::new(RwLock::new(StoredVolume::empty(
                    VolumeDescriptor::new(dict, AXIE_LANG),
                    dict.to_owned(),
                )))
            });
        }
        let mut order = [src.clone(), dst.clone(), axi.clone()];
        order.sort();
        let shared: Vec<Shared> = order
            .iter()
            .map(|h| self.volume(h))
            .collect::<Result<_, _>>()?;
        let mut guards: BTreeMap<VolumeHandle, RwLockWriteGuard<'_, StoredVolume>> = order
            .iter()
            .cloned()
            .zip(shared.iter().map(write))
            .collect();

        let mut set = VolumeSet::new(
            [Volume::new(dict, &src.lang), Volume::new(dict, &dst.lang)],
            {
                let mut av = AxieVolume::new(dict);
                for el in &guards[&axi].entries {
                    av.axies.push(crate::model::Axie::from_element(el)?);
                }
                av
            },
        );
        for end in [&req.source, &req.target] {
            let h = VolumeHandle::new(dict, end.entry.lang());
            let id = end.entry.to_string();
            let el = guards[&h]
                .get(&id)
                .ok_or_else(|| StoreError::NotFound(id.clone()))?;
            let vocable = Vocable::from_element(el)?;
            if let Some(v) = set.volumes.get_mut(end.entry.lang()) {
                v.entries.push(vocable);
            }
        }
        let known: HashSet<_> = set.axies.axies.iter().map(|a| a.id.clone()).collect();
        let outcome = add_translation_link(req, &mut set)?;

        for id in &outcome.modified {
            let h = VolumeHandle::new(dict, id.lang());
            let vocable = set
                .entry(id)
                .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
            if let Some(g) = guards.get_mut(&h) {
                g.replace(vocable.to_element())?;
            }
        }
        for axie in set.axies.axies.iter().filter(|a| !known.contains(&a.id)) {
            if let Some(g) = guards.get_mut(&axi) {
                g.upsert(axie.to_element());
            }
        }
        for g in guards.values() {
            self.persist(g)?;
        }
        Ok(outcome)
    }

    /// Query every volume whose dictionary and language match (`*` matches
    /// all), merge hits in volume order without repeating an id, then window.
    pub fn lookup(&self, dict: &str, lang: &str, q: &Query) -> Result<Lookup, StoreError> {
        let handles: Vec<VolumeHandle> = self
            .handles()
            .into_iter()
            .filter(|h| matches_pattern(dict, &h.dict) && matches_pattern(lang, &h.lang))
            .collect();
        if handles.is_empty() {
            return Err(StoreError::UnknownDictionary(format!("{dict}/{lang}")));
        }
        let mut hits = Vec::new();
        let mut seen = HashSet::new();
        let mut indexed_somewhere = false;
        for h in handles {
            let vol = self.volume(&h)?;
            let guard = read(&vol);
            if !guard.is_indexed(&q.criteria) {
                continue;
            }
            indexed_somewhere = true;
            for id in guard.matching(&q.criteria, &q.value, q.strategy)? {
                if seen.insert(id.clone()) {
                    let entry = guard
                        .get(&id)
                        .cloned()
                        .ok_or_else(|| StoreError::NotFound(id.clone()))?;
                    hits.push(LookupHit {
                        volume: h.clone(),
                        id,
                        entry,
                    });
                }
            }
        }
        if !indexed_somewhere {
            return Err(StoreError::UnknownCriteria(q.criteria.clone()));
        }
        Ok(Lookup {
            total: hits.len(),
            start: q.start,
            hits: hits.into_iter().skip(q.start).take(q.count).collect(),
        })
    }

    /// Values of `key` (`*` for every indexed field) in each hit.
    pub fn project(&self, lookup: &Lookup, key: &str) -> Result<Vec<KeyValue>, StoreError> {
        let mut out = Vec::new();
        let mut known = false;
        for hit in &lookup.hits {
            let descriptor = self.descriptor(&hit.volume)?;
            let fields: Vec<(String, String)> = if key == "*" {
                descriptor
                    .indexed_fields
                    .iter()
                    .map(|f| (f.criteria.clone(), f.path.clone()))
                    .collect()
            } else if key == HANDLE_CRITERIA {
                known = true;
                out.push(KeyValue {
                    entry: hit.id.clone(),
                    key: key.to_owned(),
                    value: hit.id.clone(),
                });
                continue;
            } else {
                descriptor
                    .path_of(key)
                    .map(|p| vec![(key.to_owned(), p.to_owned())])
                    .unwrap_or_default()
            };
            known |= !fields.is_empty() || key == "*";
            for (criteria, path) in fields {
                for value in field_values(&hit.entry, &path) {
                    out.push(KeyValue {
                        entry: hit.id.clone(),
                        key: criteria.clone(),
                        value,
                    });
                }
            }
        }
        if !known && !lookup.hits.is_empty() {
            return Err(StoreError::UnknownCriteria(key.to_owned()));
        }
        Ok(out)
    }
}
