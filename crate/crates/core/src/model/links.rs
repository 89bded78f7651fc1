//! Translation links through the pivot volume.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::entry::{
    sense_index, Axie, AxieRef, AxieVolume, Lexie, Refine, Vocable, VocableLink, Volume,
};
use super::ids::{AxieId, EntryId};
use super::quality::{revised_level, Contributor, QualityLevel};
use super::ModelError;

/// The monolingual volumes of one dictionary plus its axie volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeSet {
    pub volumes: BTreeMap<String, Volume>,
    pub axies: AxieVolume,
}

impl VolumeSet {
    pub fn new(volumes: impl IntoIterator<Item = Volume>, axies: AxieVolume) -> Self {
        VolumeSet {
            volumes: volumes.into_iter().map(|v| (v.lang.clone(), v)).collect(),
            axies,
        }
    }

    pub fn entry(&self, id: &EntryId) -> Option<&Vocable> {
        self.volumes.get(id.lang()).and_then(|v| v.get(id))
    }

    pub fn entry_mut(&mut self, id: &EntryId) -> Option<&mut Vocable> {
        self.volumes.get_mut(id.lang()).and_then(|v| v.get_mut(id))
    }

    /// Store axies produced by [`infer_transitive_links`] and reference them
    /// from the senses they link.
    pub fn apply_axies(&mut self, new_axies: Vec<Axie>) -> Vec<EntryId> {
        let mut touched = Vec::new();
        for axie in new_axies {
            for r in &axie.refs {
                let Some(sense) = &r.sense else { continue };
                if let Some(lexie) = self.entry_mut(&r.entry).and_then(|e| e.sense_mut(sense)) {
                    if !lexie.axie_refs.contains(&axie.id) {
                        lexie.axie_refs.push(axie.id.clone());
                        touched.push(r.entry.clone());
                    }
                }
            }
            self.axies.axies.push(axie);
        }
        touched.sort();
        touched.dedup();
        touched
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkEnd {
    pub entry: EntryId,
    pub sense: Option<String>,
}

impl LinkEnd {
    pub fn sense(entry: EntryId, sense: impl Into<String>) -> Self {
        LinkEnd {
            entry,
            sense: Some(sense.into()),
        }
    }

    pub fn vocable(entry: EntryId) -> Self {
        LinkEnd { entry, sense: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRequest {
    pub source: LinkEnd,
    pub target: LinkEnd,
    pub creator: Contributor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkCase {
    /// Sense to sense; the link is recorded on both sides.
    Bijective,
    /// Sense to vocable; a draft sense is created on the target.
    DraftSense,
    /// Vocable to vocable; only the source vocable carries a note.
    VocableNote,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkOutcome {
    pub case: LinkCase,
    pub axie: Option<AxieId>,
    pub created_sense: Option<String>,
    pub modified: Vec<EntryId>,
}

/// Orders the two ends so that the id reads `fra` before `khm`.
fn oriented<'a>(x: &'a EntryId, y: &'a EntryId) -> (&'a EntryId, &'a EntryId) {
    if x.lang() <= y.lang() {
        (x, y)
    } else {
        (y, x)
    }
}

/// Next free axie id for the pair; the trailing index continues the
/// numbering of axies already created from the same first entry.
pub fn fresh_axie_id<'a>(
    x: &EntryId,
    y: &EntryId,
    existing: impl IntoIterator<Item = &'a AxieId>,
) -> Result<AxieId, ModelError> {
    let (first, second) = oriented(x, y);
    let used = existing
        .into_iter()
        .filter(|id| {
            id.source_lang() == first.lang()
                && id.source_headword() == first.headword()
                && id.ordinal() == first.ordinal()
        })
        .map(AxieId::sense_index)
        .max()
        .unwrap_or(0);
    AxieId::new(
        first.lang(),
        first.headword(),
        second.lang(),
        second.headword(),
        first.ordinal(),
        used + 1,
    )
}

pub fn add_translation_link(
    req: &LinkRequest,
    set: &mut VolumeSet,
) -> Result<LinkOutcome, ModelError> {
    let (src, dst) = (&req.source, &req.target);
    if src.entry.lang() == dst.entry.lang() {
        return Err(ModelError::InvalidInput(format!(
            "cannot link two entries of the same volume ({})",
            src.entry.lang()
        )));
    }
    let missing = |id: &EntryId| ModelError::NotFound(id.to_string());
    let source = set.entry(&src.entry).ok_or_else(|| missing(&src.entry))?;
    set.entry(&dst.entry).ok_or_else(|| missing(&dst.entry))?;
    if let Some(s) = &src.sense {
        source
            .sense(s)
            .ok_or_else(|| ModelError::NotFound(format!("{}/{s}", src.entry)))?;
    }

    let Some(src_sense) = src.sense.clone() else {
        if dst.sense.is_some() {
            return Err(ModelError::InvalidInput(
                "a link from a whole vocable must target a whole vocable".into(),
            ));
        }
        let source = set
            .entry_mut(&src.entry)
            .ok_or_else(|| missing(&src.entry))?;
        let target_id = dst.entry.clone();
        if !source.pending_notes.iter().any(|n| n.target == target_id) {
            source.pending_notes.push(VocableLink {
                target: target_id,
                refine: Refine::Urgent,
            });
        }
        source.revision += 1;
        return Ok(LinkOutcome {
            case: LinkCase::VocableNote,
            axie: None,
            created_sense: None,
            modified: vec![src.entry.clone()],
        });
    };

    let (case, dst_sense, level, refine) = match &dst.sense {
        Some(s) => {
            set.entry(&dst.entry)
                .and_then(|t| t.sense(s))
                .ok_or_else(|| ModelError::NotFound(format!("{}/{s}", dst.entry)))?;
            (
                LinkCase::Bijective,
                s.clone(),
                req.creator.skill,
                Refine::No,
            )
        }
        None => {
            let target = set
                .entry_mut(&dst.entry)
                .ok_or_else(|| missing(&dst.entry))?;
            let mut draft = Lexie::new(target.senses.len() + 1);
            draft.level = Some(QualityLevel::DRAFT);
            draft.refine = Refine::Yes;
            let id = draft.sense_id.clone();
            target.senses.push(draft);
            (LinkCase::DraftSense, id, QualityLevel::DRAFT, Refine::Yes)
        }
    };

    let id = fresh_axie_id(
        &src.entry,
        &dst.entry,
        set.axies.axies.iter().map(|a| &a.id),
    )?;
    let axie = Axie {
        id: id.clone(),
        refs: vec![
            AxieRef::new(src.entry.clone(), Some(src_sense.clone())),
            AxieRef::new(dst.entry.clone(), Some(dst_sense.clone())),
        ],
        level: Some(level),
        refine,
    };
    for (entry, sense) in [(&src.entry, &src_sense), (&dst.entry, &dst_sense)] {
        let vocable = set.entry_mut(entry).ok_or_else(|| missing(entry))?;
        vocable
            .sense_mut(sense)
            .ok_or_else(|| ModelError::NotFound(format!("{entry}/{sense}")))?
            .axie_refs
            .push(id.clone());
        vocable.revision += 1;
    }
    set.axies.axies.push(axie);
    Ok(LinkOutcome {
        case,
        axie: Some(id),
        created_sense: (case == LinkCase::DraftSense).then_some(dst_sense),
        modified: vec![src.entry.clone(), dst.entry.clone()],
    })
}

/// Record a revision of `entry` by `contributor`.
pub fn revise_entry(entry: &Vocable, contributor: &Contributor) -> Vocable {
    let mut next = entry.clone();
    next.level = Some(revised_level(entry.level, contributor));
    next.revision += 1;
    next
}

/// One composition step over the pivot: for every pair of axies that share
/// a sense of volume `b`, propose a draft axie joining their `a` and `c`
/// senses, unless some axie already joins them.
pub fn infer_transitive_links(
    axies: &[Axie],
    a: &str,
    b: &str,
    c: &str,
) -> Result<Vec<Axie>, ModelError> {
    if a == b || b == c || a == c {
        return Err(ModelError::InvalidInput(format!(
            "transitive inference needs three distinct volumes, got {a}/{b}/{c}"
        )));
    }
    let mut by_pivot: HashMap<&AxieRef, Vec<usize>> = HashMap::new();
    for (i, axie) in axies.iter().enumerate() {
        for r in axie.refs.iter().filter(|r| r.volume() == b) {
            by_pivot.entry(r).or_default().push(i);
        }
    }
    let mut linked: HashSet<(&AxieRef, &AxieRef)> = HashSet::new();
    for axie in axies {
        for x in &axie.refs {
            for y in &axie.refs {
                linked.insert((x, y));
            }
        }
    }

    let mut ids: Vec<AxieId> = axies.iter().map(|a| a.id.clone()).collect();
    let mut created: Vec<Axie> = Vec::new();
    let mut seen: HashSet<(AxieRef, AxieRef)> = HashSet::new();
    for axie in axies {
        for from in axie.refs.iter().filter(|r| r.volume() == a) {
            for pivot in axie.refs.iter().filter(|r| r.volume() == b) {
                for &j in &by_pivot[pivot] {
                    for to in axies[j].refs.iter().filter(|r| r.volume() == c) {
                        if linked.contains(&(from, to)) || !seen.insert((from.clone(), to.clone()))
                        {
                            continue;
                        }
                        let id = fresh_axie_id(&from.entry, &to.entry, &ids)?;
                        ids.push(id.clone());
                        created.push(Axie {
                            id,
                            refs: vec![from.clone(), to.clone()],
                            level: Some(QualityLevel::DRAFT),
                            refine: Refine::Yes,
                        });
                    }
                }
            }
        }
    }
    Ok(created)
}

/// Sense position of a ref, for callers that need the numeric form.
pub fn ref_sense_index(r: &AxieRef) -> Option<usize> {
    r.sense.as_deref().and_then(sense_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ids::make_entry_id;

    fn vocable(lang: &str, hw: &str, ord: u32, senses: usize) -> Vocable {
        let mut v = Vocable::new(make_entry_id(lang, hw, ord).unwrap());
        for i in 1..=senses {
            let mut s = Lexie::new(i);
            s.gloss = Some(format!("{hw} {i}"));
            v.senses.push(s);
        }
        v
    }

    fn set() -> VolumeSet {
        let mut fra = Volume::new("t", "fra");
        fra.entries.push(vocable("fra", "abondant", 27, 2));
        fra.entries.push(vocable("fra", "x", 1, 1));
        let mut khm = Volume::new("t", "khm");
        khm.entries.push(vocable("khm", "sambō", 1, 1));
        khm.entries.push(vocable("khm", "y", 2, 0));
        VolumeSet::new([fra, khm], AxieVolume::new("t"))
    }

    fn contributor(skill: u8) -> Contributor {
        Contributor::new("ana", QualityLevel::new(skill).unwrap())
    }

    fn id(s: &str) -> EntryId {
        s.parse().unwrap()
    }

    #[test]
    fn sense_to_sense_is_bijective() {
        let mut set = set();
        let req = LinkRequest {
            source: LinkEnd::sense(id("fra.abondant.27.e"), "s1"),
            target: LinkEnd::sense(id("khm.sambō.1.e"), "s1"),
            creator: contributor(2),
        };
        let out = add_translation_link(&req, &mut set).unwrap();
        assert_eq!(out.case, LinkCase::Bijective);
        let axie_id = out.axie.unwrap();
        assert_eq!(axie_id.to_string(), "axi.[fra:abondant,khm:sambō].27.1.e");
        let axie = set.axies.get(&axie_id).unwrap();
        assert_eq!(axie.refs.len(), 2);
        assert!(axie.is_well_formed());
        assert_eq!(
            set.entry(&id("fra.abondant.27.e")).unwrap().senses[0].axie_refs,
            std::slice::from_ref(&axie_id)
        );
        assert_eq!(
            set.entry(&id("khm.sambō.1.e")).unwrap().senses[0].axie_refs,
            [axie_id]
        );
    }

    #[test]
    fn reverse_direction_keeps_french_first_in_id() {
        let mut set = set();
        let req = LinkRequest {
            source: LinkEnd::sense(id("khm.sambō.1.e"), "s1"),
            target: LinkEnd::sense(id("fra.x.1.e"), "s1"),
            creator: contributor(1),
        };
        let out = add_translation_link(&req, &mut set).unwrap();
        assert_eq!(out.axie.unwrap().to_string(), "axi.[fra:x,khm:sambō].1.1.e");
    }

    #[test]
    fn sense_to_vocable_creates_draft_sense() {
        let mut set = set();
        let req = LinkRequest {
            source: LinkEnd::sense(id("fra.x.1.e"), "s1"),
            target: LinkEnd::vocable(id("khm.y.2.e")),
            creator: contributor(4),
        };
        let out = add_translation_link(&req, &mut set).unwrap();
        assert_eq!(out.case, LinkCase::DraftSense);
        assert_eq!(out.created_sense.as_deref(), Some("s1"));
        let y = set.entry(&id("khm.y.2.e")).unwrap();
        assert_eq!(y.senses.len(), 1);
        assert_eq!(y.senses[0].level, Some(QualityLevel::DRAFT));
        assert_eq!(y.senses[0].refine, Refine::Yes);
        let axie = set.axies.get(out.axie.as_ref().unwrap()).unwrap();
        assert_eq!(
            (axie.level, axie.refine),
            (Some(QualityLevel::DRAFT), Refine::Yes)
        );
    }

    #[test]
    fn vocable_to_vocable_only_touches_source() {
        let mut set = set();
        let before = set
            .entry(&id("khm.sambō.1.e"))
            .unwrap()
            .to_element()
            .to_xml();
        let req = LinkRequest {
            source: LinkEnd::vocable(id("fra.x.1.e")),
            target: LinkEnd::vocable(id("khm.sambō.1.e")),
            creator: contributor(1),
        };
        let out = add_translation_link(&req, &mut set).unwrap();
        assert_eq!((out.case, out.axie), (LinkCase::VocableNote, None));
        let x = set.entry(&id("fra.x.1.e")).unwrap();
        assert_eq!(x.pending_notes[0].refine, Refine::Urgent);
        assert_eq!(
            set.entry(&id("khm.sambō.1.e"))
                .unwrap()
                .to_element()
                .to_xml(),
            before
        );
        assert!(set.axies.axies.is_empty());
    }

    #[test]
    fn link_errors() {
        let mut set = set();
        let same = LinkRequest {
            source: LinkEnd::sense(id("fra.x.1.e"), "s1"),
            target: LinkEnd::sense(id("fra.abondant.27.e"), "s1"),
            creator: contributor(1),
        };
        assert!(matches!(
            add_translation_link(&same, &mut set),
            Err(ModelError::InvalidInput(_))
        ));
        let missing = LinkRequest {
            source: LinkEnd::sense(id("fra.nope.1.e"), "s1"),
            target: LinkEnd::vocable(id("khm.y.2.e")),
            creator: contributor(1),
        };
        assert!(matches!(
            add_translation_link(&missing, &mut set),
            Err(ModelError::NotFound(_))
        ));
        let bad_sense = LinkRequest {
            source: LinkEnd::sense(id("fra.x.1.e"), "s9"),
            target: LinkEnd::vocable(id("khm.y.2.e")),
            creator: contributor(1),
        };
        assert!(matches!(
            add_translation_link(&bad_sense, &mut set),
            Err(ModelError::NotFound(_))
        ));
        assert_eq!(set, self::set());
    }

    #[test]
    fn second_link_from_same_entry_gets_next_index() {
        let mut set = set();
        for (sense, target) in [("s1", "khm.sambō.1.e"), ("s2", "khm.y.2.e")] {
            let req = LinkRequest {
                source: LinkEnd::sense(id("fra.abondant.27.e"), sense),
                target: LinkEnd::vocable(id(target)),
                creator: contributor(1),
            };
            add_translation_link(&req, &mut set).unwrap();
        }
        let ids: Vec<String> = set.axies.axies.iter().map(|a| a.id.to_string()).collect();
        assert_eq!(
            ids,
            [
                "axi.[fra:abondant,khm:sambō].27.1.e",
                "axi.[fra:abondant,khm:y].27.2.e"
            ]
        );
    }

    #[test]
    fn revise_entry_examples() {
        let mut e = vocable("fra", "x", 1, 1);
        e.level = Some(QualityLevel::new(2).unwrap());
        let r = revise_entry(&e, &contributor(3));
        assert_eq!((r.level.unwrap().stars(), r.revision), (3, 1));
        e.level = Some(QualityLevel::new(4).unwrap());
        let r = revise_entry(&e, &contributor(2));
        assert_eq!((r.level.unwrap().stars(), r.revision), (4, 1));
        e.level = Some(QualityLevel::EXPERT);
        assert_eq!(
            revise_entry(&e, &contributor(5)).level,
            Some(QualityLevel::EXPERT)
        );
    }

    fn axie(n: u32, ends: &[(&str, &str)]) -> Axie {
        Axie {
            id: AxieId::new("aaa", "p", "bbb", "q", n, 1).unwrap(),
            refs: ends
                .iter()
                .map(|(e, s)| AxieRef::new(id(e), Some(s.to_string())))
                .collect(),
            level: None,
            refine: Refine::No,
        }
    }

    #[test]
    fn transitive_single_chain() {
        let axies = vec![
            axie(1, &[("aaa.a.1.e", "s1"), ("bbb.b.1.e", "s1")]),
            axie(2, &[("bbb.b.1.e", "s1"), ("ccc.c.1.e", "s1")]),
        ];
        let new = infer_transitive_links(&axies, "aaa", "bbb", "ccc").unwrap();
        assert_eq!(new.len(), 1);
        assert_eq!(new[0].refs[0].entry, id("aaa.a.1.e"));
        assert_eq!(new[0].refs[1].entry, id("ccc.c.1.e"));
        assert_eq!(
            (new[0].level, new[0].refine),
            (Some(QualityLevel::DRAFT), Refine::Yes)
        );
        assert!(new[0].is_well_formed());

        let mut all = axies.clone();
        all.extend(new);
        assert!(infer_transitive_links(&all, "aaa", "bbb", "ccc")
            .unwrap()
            .is_empty());
        assert!(infer_transitive_links(&[], "aaa", "bbb", "ccc")
            .unwrap()
            .is_empty());
        assert!(infer_transitive_links(&axies, "aaa", "aaa", "ccc").is_err());
    }
}
