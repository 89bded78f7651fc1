mod common;

use std::collections::BTreeSet;

use motamot_core::model::{
    add_translation_link, infer_transitive_links, make_entry_id, record_review, revise_entry,
    update_contributor_streak, AxieId, AxieVolume, Contributor, EntryId, Lexie, LinkEnd,
    LinkRequest, QualityLevel, ReviewOutcome, Vocable, Volume, VolumeSet,
};
use proptest::prelude::*;

fn lvl(n: u8) -> QualityLevel {
    QualityLevel::new(n).unwrap()
}

fn headword() -> impl Strategy<Value = String> {
    "[a-zāōūəéç%.,:\\[\\]' -]{1,12}"
}

fn lang() -> impl Strategy<Value = String> {
    "[a-z]{3}"
}

proptest! {
    #[test]
    fn entry_id_round_trip(l in lang(), hw in headword(), ord in 1u32..100_000) {
        let id = make_entry_id(&l, &hw, ord).unwrap();
        let back: EntryId = id.to_string().parse().unwrap();
        prop_assert_eq!(back.headword(), hw.as_str());
        prop_assert_eq!(back, id);
    }

    #[test]
    fn axie_id_round_trip(a in lang(), x in headword(), b in lang(), y in headword(), ord in 1u32..10_000, k in 1u32..500) {
        let id = AxieId::new(&a, &x, &b, &y, ord, k).unwrap();
        let back: AxieId = id.to_string().parse().unwrap();
        prop_assert_eq!(back, id);
    }

    #[test]
    fn revise_never_lowers_level(current in proptest::option::of(1u8..=5), skill in 1u8..=5) {
        let mut e = Vocable::new(make_entry_id("fra", "x", 1).unwrap());
        e.level = current.map(lvl);
        let r = revise_entry(&e, &Contributor::new("c", lvl(skill)));
        prop_assert!(r.level.unwrap() >= e.level.unwrap_or(QualityLevel::DRAFT));
        prop_assert_eq!(r.level.unwrap().stars(), current.unwrap_or(1).max(skill));
        prop_assert_eq!(r.revision, e.revision + 1);
    }

    #[test]
    fn link_cases_hold(src_senses in 1usize..4, dst_senses in 0usize..4, pick_src in 0usize..4, pick_dst in 0usize..5, skill in 1u8..=5) {
        let mut set = two_volumes(src_senses, dst_senses);
        let src = make_entry_id("fra", "chat", 1).unwrap();
        let dst = make_entry_id("khm", "chmā", 1).unwrap();
        let before = set.entry(&dst).unwrap().to_element().to_xml();
        let source = match pick_src % (src_senses + 1) {
            0 => LinkEnd::vocable(src.clone()),
            i => LinkEnd::sense(src.clone(), format!("s{i}")),
        };
        let target = match pick_dst % (dst_senses + 1) {
            0 => LinkEnd::vocable(dst.clone()),
            i => LinkEnd::sense(dst.clone(), format!("s{i}")),
        };
        let req = LinkRequest { source: source.clone(), target: target.clone(), creator: Contributor::new("c", lvl(skill)) };
        let result = add_translation_link(&req, &mut set);
        match (&source.sense, &target.sense) {
            (None, Some(_)) => prop_assert!(result.is_err()),
            (None, None) => {
                result.unwrap();
                prop_assert!(set.axies.axies.is_empty());
                prop_assert_eq!(set.entry(&dst).unwrap().to_element().to_xml(), before);
                prop_assert_eq!(set.entry(&src).unwrap().pending_notes.len(), 1);
            }
            (Some(s), t) => {
                let out = result.unwrap();
                let axie = out.axie.unwrap();
                let t = t.clone().or(out.created_sense.clone()).unwrap();
                let on_src = set.entry(&src).unwrap().sense(s).unwrap().axie_refs.contains(&axie);
                let on_dst = set.entry(&dst).unwrap().sense(&t).unwrap().axie_refs.contains(&axie);
                prop_assert!(on_src && on_dst);
                for a in &set.axies.axies {
                    prop_assert!(a.is_well_formed());
                }
            }
        }
    }

    #[test]
    fn transitive_inference_matches_composition(
        edges in proptest::collection::vec(((0usize..3, 0usize..4, 0usize..3), (0usize..3, 0usize..4, 0usize..3)), 0..=50)
    ) {
        let axies = common::axie_graph(&edges);
        prop_assert!(axies.len() <= 50);
        let [a, b, c] = common::GRAPH_LANGS;
        let created = infer_transitive_links(&axies, a, b, c).unwrap();
        let got: BTreeSet<_> = created.iter().map(|x| (x.refs[0].clone(), x.refs[1].clone())).collect();
        prop_assert_eq!(got.len(), created.len());
        prop_assert_eq!(&got, &common::composition_oracle(&axies, a, b, c));

        let mut ids: BTreeSet<_> = axies.iter().map(|x| x.id.clone()).collect();
        for x in &created {
            prop_assert!(x.is_well_formed());
            prop_assert_eq!(x.level, Some(QualityLevel::DRAFT));
            prop_assert!(ids.insert(x.id.clone()), "id {} reused", x.id);
        }

        let mut all = axies.clone();
        all.extend(created);
        prop_assert!(infer_transitive_links(&all, a, b, c).unwrap().is_empty());
    }
}

fn two_volumes(src_senses: usize, dst_senses: usize) -> VolumeSet {
    let mut fr = Volume::new("d", "fra");
    let mut v = Vocable::new(make_entry_id("fra", "chat", 1).unwrap());
    v.senses = (1..=src_senses).map(Lexie::new).collect();
    fr.entries.push(v);
    let mut km = Volume::new("d", "khm");
    let mut v = Vocable::new(make_entry_id("khm", "chmā", 1).unwrap());
    v.senses = (1..=dst_senses).map(Lexie::new).collect();
    km.entries.push(v);
    VolumeSet::new([fr, km], AxieVolume::new("d"))
}

#[test]
fn promotion_example() {
    let mut e = Vocable::new(make_entry_id("fra", "x", 1).unwrap());
    e.level = Some(lvl(2));
    assert_eq!(
        revise_entry(&e, &Contributor::new("r", lvl(3))).level,
        Some(lvl(3))
    );
}

#[test]
fn contributor_promoted_exactly_at_ten() {
    let mut c = Contributor::new("c", lvl(2));
    for n in 1..=10 {
        let before = c.skill;
        c = update_contributor_streak(&c, ReviewOutcome::Validated);
        if n < 10 {
            assert_eq!((c.skill, c.validated_streak), (before, n));
        }
    }
    assert_eq!((c.skill, c.validated_streak), (lvl(3), 0));
}

#[test]
fn correction_resets_streak() {
    let mut c = Contributor::new("c", lvl(1));
    for _ in 0..9 {
        c = record_review(&c, &Contributor::new("r", lvl(4)), ReviewOutcome::Validated);
    }
    c = record_review(&c, &Contributor::new("r", lvl(4)), ReviewOutcome::Corrected);
    assert_eq!((c.skill, c.validated_streak), (lvl(1), 0));
}
