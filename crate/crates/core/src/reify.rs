//! Splitting the French→Khmer volume into French, axie and Khmer volumes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::model::{
    make_axie_id, make_entry_id, Axie, AxieId, AxieRef, AxieVolume, EntryId, Lexie, ModelError,
    Refine, Vocable, Volume,
};
use crate::restructure::strip_particles;

pub const KHMER_LANG: &str = "khm";

#[derive(Debug, Error)]
pub enum ReifyError {
    #[error("entry {0} already references axies; reification runs once")]
    AlreadyReified(EntryId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReifyOutput {
    pub french: Volume,
    pub axies: AxieVolume,
    pub khmer: Volume,
    pub report: Vec<String>,
}

/// Khmer headword a translation merges under.
pub fn merge_key(translation: &str) -> String {
    strip_particles(translation)
}

pub fn reify_links(french: &Volume) -> Result<ReifyOutput, ReifyError> {
    let mut out_fr = french.clone();
    let mut axies = AxieVolume::new(french.name.clone());
    let mut khmer: Vec<Vocable> = Vec::new();
    let mut khmer_index: HashMap<String, usize> = HashMap::new();
    let mut report = Vec::new();

    for entry in &mut out_fr.entries {
        if entry.senses.iter().any(|s| !s.axie_refs.is_empty()) {
            return Err(ReifyError::AlreadyReified(entry.id.clone()));
        }
        let mut k = 0;
        for sense in &mut entry.senses {
            for translation in std::mem::take(&mut sense.translations) {
                let key = merge_key(&translation);
                if key.is_empty() {
                    report.push(format!(
                        "{}/{}: empty translation {:?} skipped",
                        entry.id, sense.sense_id, translation
                    ));
                    continue;
                }
                k += 1;
                let axie_id = make_axie_id(&entry.headword, &key, entry.id.ordinal(), k)?;
                let slot = match khmer_index.get(&key) {
                    Some(&i) => i,
                    None => {
                        khmer.push(Vocable::new(make_entry_id(KHMER_LANG, &key, 1)?));
                        khmer_index.insert(key.clone(), khmer.len() - 1);
                        khmer.len() - 1
                    }
                };
                let target = &mut khmer[slot];
                let mut lexie = Lexie::new(target.senses.len() + 1);
                lexie.axie_refs.push(axie_id.clone());
                let khm_ref = AxieRef::new(target.id.clone(), Some(lexie.sense_id.clone()));
                target.senses.push(lexie);

                sense.axie_refs.push(axie_id.clone());
                axies.axies.push(Axie {
                    id: axie_id,
                    refs: vec![
                        AxieRef::new(entry.id.clone(), Some(sense.sense_id.clone())),
                        khm_ref,
                    ],
                    level: None,
                    refine: Refine::No,
                });
            }
        }
    }
    let mut khmer_volume = Volume::new(french.name.clone(), KHMER_LANG);
    khmer_volume.entries = khmer;
    Ok(ReifyOutput {
        french: out_fr,
        axies,
        khmer: khmer_volume,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Link {
    FrenchToPivot {
        entry: EntryId,
        sense: String,
        axie: AxieId,
    },
    PivotToKhmer {
        axie: AxieId,
        entry: EntryId,
    },
}

/// The links an entry takes part in, in sense order: each French sense to
/// its axies, each axie to its Khmer entries.
pub fn enumerate_links(entry: &Vocable, axies: &AxieVolume) -> Vec<Link> {
    let mut out = Vec::new();
    for sense in &entry.senses {
        for id in &sense.axie_refs {
            out.push(Link::FrenchToPivot {
                entry: entry.id.clone(),
                sense: sense.sense_id.clone(),
                axie: id.clone(),
            });
            if let Some(axie) = axies.get(id) {
                for r in axie.refs.iter().filter(|r| r.volume() == KHMER_LANG) {
                    out.push(Link::PivotToKhmer {
                        axie: id.clone(),
                        entry: r.entry.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Stable sort by code points of the script form, falling back to the headword.
pub fn sort_volume(volume: &Volume) -> Volume {
    let mut out = volume.clone();
    out.entries.sort_by(|a, b| a.sort_key().cmp(b.sort_key()));
    out
}

fn sense_refs(volume: &Volume) -> impl Iterator<Item = (&Vocable, &Lexie, &AxieId)> {
    volume
        .entries
        .iter()
        .flat_map(|e| e.senses.iter().map(move |s| (e, s)))
        .flat_map(|(e, s)| s.axie_refs.iter().map(move |id| (e, s, id)))
}

/// Structural consistency of the three volumes. Empty means consistent.
pub fn check_integrity(french: &Volume, axies: &AxieVolume, khmer: &Volume) -> Vec<String> {
    let mut report = Vec::new();
    let mut by_id: HashMap<&AxieId, &Axie> = HashMap::new();
    for a in &axies.axies {
        if by_id.insert(&a.id, a).is_some() {
            report.push(format!("duplicate axie id {}", a.id));
        }
    }
    for (label, vol) in [("French", french), ("Khmer", khmer)] {
        let mut ids = HashSet::new();
        for e in &vol.entries {
            if !ids.insert(&e.id) {
                report.push(format!("duplicate {label} entry id {}", e.id));
            }
        }
        for (e, s, id) in sense_refs(vol) {
            match by_id.get(id) {
                None => report.push(format!(
                    "{}/{} references missing axie {}",
                    e.id, s.sense_id, id
                )),
                Some(a) => {
                    let back = AxieRef::new(e.id.clone(), Some(s.sense_id.clone()));
                    let back_entry = AxieRef::new(e.id.clone(), None);
                    if !a.refs.contains(&back) && !a.refs.contains(&back_entry) {
                        report.push(format!(
                            "axie {} does not point back to {}/{}",
                            id, e.id, s.sense_id
                        ));
                    }
                }
            }
        }
    }

    let mut referenced_khmer: BTreeSet<&EntryId> = BTreeSet::new();
    for a in &axies.axies {
        let fr: Vec<&AxieRef> = a
            .refs
            .iter()
            .filter(|r| r.volume() == french.lang)
            .collect();
        let km: Vec<&AxieRef> = a.refs.iter().filter(|r| r.volume() == khmer.lang).collect();
        if fr.len() != 1 || km.len() != 1 || a.refs.len() != 2 {
            report.push(format!(
                "axie {} must link one French sense and one Khmer entry ({} French, {} Khmer, {} refs)",
                a.id,
                fr.len(),
                km.len(),
                a.refs.len()
            ));
        }
        for r in fr {
            let sense = r.sense.as_deref();
            let resolved = french
                .get(&r.entry)
                .and_then(|e| sense.and_then(|s| e.sense(s)));
            match resolved {
                None => report.push(format!(
                    "axie {} points to missing French sense {}/{:?}",
                    a.id, r.entry, sense
                )),
                Some(l) if !l.axie_refs.contains(&a.id) => report.push(format!(
                    "French sense {}/{} does not reference axie {}",
                    r.entry, l.sense_id, a.id
                )),
                Some(_) => {}
            }
        }
        for r in km {
            referenced_khmer.insert(&r.entry);
            match khmer.get(&r.entry) {
                None => report.push(format!(
                    "axie {} points to missing Khmer entry {}",
                    a.id, r.entry
                )),
                Some(e) => {
                    if let Some(s) = &r.sense {
                        if !e.sense(s).is_some_and(|l| l.axie_refs.contains(&a.id)) {
                            report.push(format!(
                                "Khmer sense {}/{} does not reference axie {}",
                                e.id, s, a.id
                            ));
                        }
                    }
                }
            }
        }
    }

    let french_refs = sense_refs(french).count();
    if axies.axies.len() != french_refs {
        report.push(format!(
            "{} axies but {} axie references from French senses",
            axies.axies.len(),
            french_refs
        ));
    }
    if khmer.entries.len() != referenced_khmer.len() {
        report.push(format!(
            "{} Khmer entries but {} distinct Khmer entries referenced by axies",
            khmer.entries.len(),
            referenced_khmer.len()
        ));
    }
    let mut headwords: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &khmer.entries {
        *headwords.entry(e.headword.as_str()).or_default() += 1;
    }
    for (hw, n) in headwords.into_iter().filter(|(_, n)| *n > 1) {
        report.push(format!("Khmer headword {hw:?} appears in {n} entries"));
    }
    report
}
