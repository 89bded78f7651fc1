mod common;

use motamot_core::ingest::{tag_volume, SENSE_DELIMITER};
use motamot_core::reify::reify_links;
use motamot_core::restructure::{
    enrich_from_supplement, restructure_volume, to_motamot_entry, validate_lmf_shape,
    SupplementLexicon,
};
use motamot_core::xml;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn tagging_is_lossless_and_verbatim() {
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(seed);
        let corpus = common::random_corpus(&mut rng, 60);
        let out = tag_volume(corpus.lines.iter().map(String::as_str));
        let segments: usize = corpus
            .lines
            .iter()
            .map(|l| l.split('\t').next().unwrap().split(SENSE_DELIMITER).count())
            .sum();
        assert_eq!(out.volume.sense_count(), segments);
        assert_eq!(segments, corpus.keys.iter().map(Vec::len).sum::<usize>());
        for (line, article) in corpus.lines.iter().zip(&out.volume.articles) {
            let khmer_column = line.split('\t').nth(1).unwrap();
            let original: Vec<&str> = khmer_column.split(SENSE_DELIMITER).collect();
            let api: Vec<String> = article.senses.iter().map(|s| s.api.join(" / ")).collect();
            assert_eq!(api, original);
        }
        let again = tag_volume(corpus.lines.iter().map(String::as_str));
        assert_eq!(again.volume.to_xml(), out.volume.to_xml());
    }
}

#[test]
fn tagged_volume_round_trips_through_xml() {
    let out = tag_volume(common::SAMPLE.lines());
    let text = out.volume.to_xml();
    let back = motamot_core::ingest::TaggedVolume::from_xml(&text).unwrap();
    assert_eq!(back, out.volume);
}

#[test]
fn restructuring_keeps_senses_and_glosses() {
    let tagged = tag_volume(common::SAMPLE.lines()).volume;
    let vol = restructure_volume(&tagged, "motamot").unwrap();
    for (article, entry) in tagged.articles.iter().zip(&vol.entries) {
        let glosses: Vec<&str> = article.senses.iter().map(|s| s.glose.as_str()).collect();
        let kept: Vec<&str> = entry
            .senses
            .iter()
            .map(|s| s.gloss.as_deref().unwrap_or(""))
            .collect();
        assert_eq!(glosses, kept);
    }
    let doc = xml::parse(&tagged.to_xml()).unwrap();
    for (i, el) in doc.root.elements().enumerate() {
        let v = to_motamot_entry(el, i as u32 + 1).unwrap();
        assert_eq!(v, vol.entries[i]);
    }
}

#[test]
fn enrichment_touches_only_the_head() {
    let tagged = tag_volume(common::SAMPLE.lines()).volume;
    let vol = restructure_volume(&tagged, "motamot").unwrap();
    let supp = SupplementLexicon::parse(common::FEM).unwrap();
    let (enriched, _) = enrich_from_supplement(&vol, &supp);
    for (a, b) in vol.entries.iter().zip(&enriched.entries) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.headword, b.headword);
        assert_eq!(a.senses, b.senses);
    }
    let abonner: Vec<_> = enriched
        .entries
        .iter()
        .filter(|e| e.headword == "abonner")
        .collect();
    assert_eq!(abonner.len(), 2);
    for e in abonner {
        assert_eq!(e.pronunciation.as_deref(), Some("ABO-NÉ"));
        assert_eq!(e.pos, None);
    }
}

#[test]
fn pipeline_outputs_have_lmf_shape() {
    let out = common::sample_pipeline();
    for vol in [&out.restructured, &out.enriched, &out.french, &out.khmer] {
        for e in &vol.entries {
            let v = validate_lmf_shape(&e.to_element());
            assert!(v.is_empty(), "{}: {v:?}", e.id);
        }
    }
}

#[test]
fn reification_runs_once() {
    let out = common::sample_pipeline();
    assert!(reify_links(&out.french).is_err());
}
