//! Where volumes live between runs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::volume::{descriptor_from_sidecar, VolumeDescriptor};
use super::StoreError;

/// A saved volume: descriptor, volume XML and the index sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavedVolume {
    pub descriptor: VolumeDescriptor,
    pub xml: String,
}

pub trait Backend: Send + Sync {
    fn load_all(&self) -> Result<Vec<SavedVolume>, StoreError>;
    fn save(
        &self,
        descriptor: &VolumeDescriptor,
        xml: &str,
        sidecar: &str,
    ) -> Result<(), StoreError>;
}

/// Keeps nothing beyond the process.
#[derive(Debug, Default)]
pub struct MemoryBackend {
    saved: Mutex<BTreeMap<(String, String), SavedVolume>>,
}

impl Backend for MemoryBackend {
    fn load_all(&self) -> Result<Vec<SavedVolume>, StoreError> {
        Ok(self
            .saved
            .lock()
            .map(|m| m.values().cloned().collect())
            .unwrap_or_default())
    }

    fn save(
        &self,
        descriptor: &VolumeDescriptor,
        xml: &str,
        _sidecar: &str,
    ) -> Result<(), StoreError> {
        if let Ok(mut m) = self.saved.lock() {
            m.insert(
                (descriptor.name.clone(), descriptor.language.clone()),
                SavedVolume {
                    descriptor: descriptor.clone(),
                    xml: xml.to_owned(),
                },
            );
        }
        Ok(())
    }
}

/// `<root>/<dict>/<lang>.xml` with a `<lang>.index.json` sidecar next to it.
#[derive(Debug, Clone)]
pub struct DirBackend {
    root: PathBuf,
}

impl DirBackend {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| StoreError::io(&root, e))?;
        Ok(DirBackend { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

fn write_atomically(path: &Path, content: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| StoreError::io(&tmp, e))?;
    f.write_all(content.as_bytes())
        .map_err(|e| StoreError::io(&tmp, e))?;
    f.sync_all().map_err(|e| StoreError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| StoreError::io(path, e))
}

impl Backend for DirBackend {
    fn load_all(&self) -> Result<Vec<SavedVolume>, StoreError> {
        let mut out = Vec::new();
        let mut dicts: Vec<PathBuf> = fs::read_dir(&self.root)
            .map_err(|e| StoreError::io(&self.root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dicts.sort();
        for dict in dicts {
            let mut sidecars: Vec<PathBuf> = fs::read_dir(&dict)
                .map_err(|e| StoreError::io(&dict, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.to_string_lossy().ends_with(".index.json"))
                .collect();
            sidecars.sort();
            for sidecar in sidecars {
                let json = fs::read_to_string(&sidecar).map_err(|e| StoreError::io(&sidecar, e))?;
                let descriptor = descriptor_from_sidecar(&json)?;
                let xml_path = dict.join(format!("{}.xml", descriptor.language));
                let xml =
                    fs::read_to_string(&xml_path).map_err(|e| StoreError::io(&xml_path, e))?;
                out.push(SavedVolume { descriptor, xml });
            }
        }
        Ok(out)
    }

    fn save(
        &self,
        descriptor: &VolumeDescriptor,
        xml: &str,
        sidecar: &str,
    ) -> Result<(), StoreError> {
        let dir = self.root.join(&descriptor.name);
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        write_atomically(&dir.join(format!("{}.xml", descriptor.language)), xml)?;
        write_atomically(
            &dir.join(format!("{}.index.json", descriptor.language)),
            sidecar,
        )
    }
}
