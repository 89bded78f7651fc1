#![allow(dead_code)]

use motamot_core::pipeline::{run_pipeline, PipelineOutput};
use motamot_core::restructure::SupplementLexicon;
use motamot_core::translit::RuleSet;

pub const SAMPLE: &str = include_str!("../../data/sample.mam-src");
pub const FEM: &str = include_str!("../../data/fem.tsv");

pub fn sample_pipeline() -> PipelineOutput {
    let supp = SupplementLexicon::parse(FEM).unwrap();
    run_pipeline(SAMPLE, &supp, &RuleSet::bundled(), "motamot").unwrap()
}

use std::collections::BTreeSet;

use motamot_core::model::{fresh_axie_id, make_entry_id, Axie, AxieRef, Refine};
use rand::rngs::StdRng;
use rand::Rng;

/// A generated source corpus together with the merge key of every
/// translation, known by construction.
pub struct Corpus {
    pub lines: Vec<String>,
    /// entry → sense → translation keys.
    pub keys: Vec<Vec<Vec<String>>>,
}

impl Corpus {
    pub fn translation_count(&self) -> usize {
        self.keys.iter().flatten().map(Vec::len).sum()
    }

    pub fn distinct_keys(&self) -> BTreeSet<&str> {
        self.keys
            .iter()
            .flatten()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

const ONSETS: &[&str] = &["k", "kh", "c", "s", "m", "p", "ph", "t", "l", "n", "b", "r"];
const NUCLEI: &[&str] = &["a", "ā", "i", "o", "ō", "u", "ū", "ə", "ae", "ie"];
const CODAS: &[&str] = &["", "", "m", "ŋ", "k", "p", "l", "h"];
const PARTICLES: &[&str] = &["(dā'el) ", "(nəw) ", "(kə') (pi) "];

fn pick<'a>(rng: &mut StdRng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

pub fn ipa_word(rng: &mut StdRng) -> String {
    let mut w = String::new();
    for i in 0..rng.random_range(1..=3) {
        if i > 0 && rng.random_bool(0.3) {
            w.push('-');
        }
        w.push_str(pick(rng, ONSETS));
        w.push_str(pick(rng, NUCLEI));
        w.push_str(pick(rng, CODAS));
    }
    w
}

fn french_word(rng: &mut StdRng) -> String {
    const LETTERS: &[&str] = &[
        "a", "b", "c", "d", "e", "é", "i", "l", "m", "n", "o", "r", "s", "t", "u",
    ];
    (0..rng.random_range(3..=9))
        .map(|_| pick(rng, LETTERS))
        .collect()
}

/// Up to `max_entries` lines, each with 1..=5 senses of 1..=3 translations.
/// Translations are drawn from a pool so that equal keys recur across entries.
pub fn random_corpus(rng: &mut StdRng, max_entries: usize) -> Corpus {
    let pool: Vec<String> = (0..rng.random_range(5..=120))
        .map(|_| ipa_word(rng))
        .collect();
    let mut lines = Vec::new();
    let mut keys = Vec::new();
    for _ in 0..rng.random_range(1..=max_entries) {
        let headword = french_word(rng);
        let mut glosses = Vec::new();
        let mut khmer = Vec::new();
        let mut entry_keys = Vec::new();
        for s in 0..rng.random_range(1..=5) {
            glosses.push(if s == 0 {
                format!("{headword} (ctx{s})")
            } else {
                format!("(ctx{s}) ({})", french_word(rng))
            });
            let mut sense_keys = Vec::new();
            let mut alternatives = Vec::new();
            for _ in 0..rng.random_range(1..=3) {
                let key = pool[rng.random_range(0..pool.len())].clone();
                let particle = if rng.random_bool(0.3) {
                    pick(rng, PARTICLES)
                } else {
                    ""
                };
                alternatives.push(format!("{particle}{key}"));
                sense_keys.push(key);
            }
            khmer.push(alternatives.join(" / "));
            entry_keys.push(sense_keys);
        }
        lines.push(format!("{}\t{}", glosses.join(" — "), khmer.join(" — ")));
        keys.push(entry_keys);
    }
    Corpus { lines, keys }
}

/// Every (a, c) pair joined through a shared `b` ref, minus pairs some axie
/// already joins. Computed by brute force over all axie pairs.
pub fn composition_oracle(
    axies: &[Axie],
    a: &str,
    b: &str,
    c: &str,
) -> BTreeSet<(AxieRef, AxieRef)> {
    let mut out = BTreeSet::new();
    for x in axies {
        for y in axies {
            for from in x.refs.iter().filter(|r| r.volume() == a) {
                for to in y.refs.iter().filter(|r| r.volume() == c) {
                    let shared = x
                        .refs
                        .iter()
                        .filter(|r| r.volume() == b)
                        .any(|p| y.refs.contains(p));
                    let already = axies
                        .iter()
                        .any(|z| z.refs.contains(from) && z.refs.contains(to));
                    if shared && !already {
                        out.insert((from.clone(), to.clone()));
                    }
                }
            }
        }
    }
    out
}

pub const GRAPH_LANGS: [&str; 3] = ["fra", "eng", "khm"];

/// Axies over a small ref universe: `edges` holds (lang, entry, sense) for
/// both ends; sense 0 stands for a whole-vocable ref.
/// (lang, entry, sense) of one axie end.
pub type End = (usize, usize, usize);

pub fn axie_graph(edges: &[(End, End)]) -> Vec<Axie> {
    let r = |(l, e, s): End| {
        AxieRef::new(
            make_entry_id(GRAPH_LANGS[l % 3], &format!("w{e}"), 1).unwrap(),
            (s > 0).then(|| format!("s{s}")),
        )
    };
    let mut axies: Vec<Axie> = Vec::new();
    for &(x, y) in edges {
        let (x, y) = (r(x), r(y));
        if x.volume() == y.volume() {
            continue;
        }
        let id = fresh_axie_id(&x.entry, &y.entry, axies.iter().map(|a| &a.id)).unwrap();
        axies.push(Axie {
            id,
            refs: vec![x, y],
            level: None,
            refine: Refine::No,
        });
    }
    axies
}

use motamot_core::store::{Store, VolumeDescriptor};

pub const DICT: &str = "motamot";

/// Put the three sample volumes into `store`.
pub fn seed(store: &Store) {
    let out = sample_pipeline();
    for (xml, lang) in [
        (out.french.to_document().to_xml(), "fra"),
        (out.axies.to_document().to_xml(), "axi"),
        (out.khmer.to_document().to_xml(), "khm"),
    ] {
        store
            .import_volume(&xml, VolumeDescriptor::new(DICT, lang))
            .unwrap();
    }
}

pub fn seeded_store() -> Store {
    let store = Store::in_memory();
    seed(&store);
    store
}
