//! Tagged articles to `m:` entries, LMF shape checks, and head enrichment
//! from a supplement lexicon.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ingest::{
    entry_form, pos_hint, split_feminine, IngestError, TaggedArticle, TaggedVolume,
};
use crate::model::{make_entry_id, Lexie, ModelError, Vocable, Volume};
use crate::xml::Element;

pub const FRENCH_LANG: &str = "fra";

#[derive(Debug, Error)]
pub enum RestructureError {
    #[error("invalid article: {0}")]
    InvalidArticle(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("supplement line {line}: {message}")]
    Supplement { line: usize, message: String },
}

/// Drop leading parenthesised particles and squeeze whitespace:
/// `(dā'el) sambō` becomes `sambō`.
pub fn strip_particles(translation: &str) -> String {
    let mut rest = translation.trim();
    while let Some(after) = rest.strip_prefix('(') {
        match after.find(')') {
            Some(close) => rest = after[close + 1..].trim_start(),
            None => break,
        }
    }
    rest.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn article_to_vocable(
    article: &TaggedArticle,
    ordinal: u32,
) -> Result<Vocable, RestructureError> {
    let id = make_entry_id(FRENCH_LANG, &article.vedette, ordinal)?;
    let mut vocable = Vocable::new(id);
    vocable.pos = article.senses.first().and_then(|s| pos_hint(&s.glose));
    for (i, sense) in article.senses.iter().enumerate() {
        let mut lexie = Lexie::new(i + 1);
        lexie.gloss = Some(sense.glose.clone());
        lexie.translations = sense.api.iter().map(|t| strip_particles(t)).collect();
        vocable.senses.push(lexie);
    }
    Ok(vocable)
}

/// Convert one tagged `<article>` element into a French vocable.
pub fn to_motamot_entry(article: &Element, ordinal: u32) -> Result<Vocable, RestructureError> {
    let article = TaggedArticle::from_element(article, ordinal as usize)?;
    article_to_vocable(&article, ordinal)
}

/// Ordinals follow input order, starting at 1.
pub fn restructure_volume(tagged: &TaggedVolume, name: &str) -> Result<Volume, RestructureError> {
    let mut volume = Volume::new(name, FRENCH_LANG);
    for (i, article) in tagged.articles.iter().enumerate() {
        volume
            .entries
            .push(article_to_vocable(article, i as u32 + 1)?);
    }
    Ok(volume)
}

/// LMF class of each structural element.
pub const LMF_MAPPING: &[(&str, &str)] = &[
    ("m:entry", "LexicalEntry"),
    ("m:head", "Form"),
    ("m:headword", "Lemma"),
    ("m:sense", "Sense"),
    ("m:gloss", "Definition"),
    ("m:refaxie", "Equivalent"),
    ("m:reflexie", "Equivalent"),
];

const HEAD_FEATURES: &[&str] = &[
    "m:headword",
    "m:writing",
    "m:pronunciation",
    "m:pos",
    "m:fem_form",
    "m:fem_pron",
];
const SENSE_FEATURES: &[&str] = &[
    "m:gloss",
    "m:formula",
    "m:domain",
    "m:translations",
    "m:refaxie",
    "m:reflexie",
    "m:examples",
    "m:idioms",
    "m:misc",
];
const LISTS: &[(&str, &str)] = &[
    ("m:translations", "m:translation"),
    ("m:examples", "m:example"),
    ("m:idioms", "m:idiom"),
];

pub fn lmf_class(element: &str) -> Option<&'static str> {
    LMF_MAPPING
        .iter()
        .find(|(e, _)| *e == element)
        .map(|(_, c)| *c)
}

/// Violations of the LexicalEntry/Form/Lemma/Sense/Definition/Equivalent
/// shape. Empty means the entry conforms.
pub fn validate_lmf_shape(entry: &Element) -> Vec<String> {
    let mut out = Vec::new();
    if entry.name != "m:entry" {
        out.push(format!(
            "LexicalEntry must be <m:entry>, found <{}>",
            entry.name
        ));
        return out;
    }
    let heads: Vec<&Element> = entry.children_named("m:head").collect();
    match heads.as_slice() {
        [] => out.push("Form missing".into()),
        [head] => {
            if head.child("m:headword").is_none() {
                out.push("Lemma missing".into());
            }
            for c in head.elements() {
                if !HEAD_FEATURES.contains(&c.name.as_str()) {
                    out.push(format!("unknown element <{}> in <m:head>", c.name));
                }
            }
        }
        _ => out.push("more than one Form".into()),
    }
    for c in entry.elements() {
        match c.name.as_str() {
            "m:head" | "m:vocable-link" => {}
            "m:sense" => {
                for f in c.elements() {
                    if !SENSE_FEATURES.contains(&f.name.as_str()) {
                        out.push(format!("unknown element <{}> in <m:sense>", f.name));
                        continue;
                    }
                    if let Some((_, item)) = LISTS.iter().find(|(l, _)| *l == f.name) {
                        for i in f.elements().filter(|i| i.name != *item) {
                            out.push(format!("unknown element <{}> in <{}>", i.name, f.name));
                        }
                    }
                    if lmf_class(&f.name) == Some("Equivalent")
                        && f.attr("idrefaxie").or_else(|| f.attr("idref")).is_none()
                    {
                        out.push(format!("Equivalent <{}> without target", f.name));
                    }
                }
            }
            other => out.push(format!("unknown element <{other}> in <m:entry>")),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupplementEntry {
    pub pronunciation: String,
    pub pos: String,
    pub homonym_count: u32,
    pub fem_pron: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupplementLexicon {
    pub entries: BTreeMap<String, SupplementEntry>,
}

impl SupplementLexicon {
    /// `headword TAB pronunciation TAB pos TAB homonym_count [TAB fem_pron]`.
    pub fn parse(tsv: &str) -> Result<Self, RestructureError> {
        let mut entries = BTreeMap::new();
        for (i, line) in tsv.lines().enumerate() {
            let bad = |message: String| RestructureError::Supplement {
                line: i + 1,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !(4..=5).contains(&cols.len()) {
                return Err(bad(format!(
                    "expected 4 or 5 columns, found {}",
                    cols.len()
                )));
            }
            let homonym_count: u32 = cols[3]
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| bad(format!("bad homonym count {:?}", cols[3])))?;
            if cols[0].is_empty() {
                return Err(bad("empty headword".into()));
            }
            entries.insert(
                cols[0].to_owned(),
                SupplementEntry {
                    pronunciation: cols[1].to_owned(),
                    pos: cols[2].to_owned(),
                    homonym_count,
                    fem_pron: cols
                        .get(4)
                        .filter(|f| !f.is_empty())
                        .map(|f| (*f).to_owned()),
                },
            );
        }
        Ok(SupplementLexicon { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnrichStats {
    pub enriched: usize,
    pub fem_forms: usize,
    /// Headwords whose pos was not copied because the supplement lists homonyms.
    pub homonyms_flagged: Vec<String>,
}

/// Fill the head block: pronunciation and feminine pronunciation from the
/// supplement, pos only for non-homonymous headwords, and the feminine form
/// recovered from the original form kept at the start of the first gloss.
pub fn enrich_from_supplement(volume: &Volume, supp: &SupplementLexicon) -> (Volume, EnrichStats) {
    let mut out = volume.clone();
    let mut stats = EnrichStats::default();
    for v in &mut out.entries {
        if v.fem_form.is_none() {
            let form = v
                .senses
                .first()
                .and_then(|s| s.gloss.as_deref())
                .map(entry_form);
            if let Some((m, Some(f))) = form.map(split_feminine) {
                if m == v.headword {
                    v.fem_form = Some(f);
                    stats.fem_forms += 1;
                }
            }
        }
        let Some(s) = supp.entries.get(&v.headword) else {
            continue;
        };
        stats.enriched += 1;
        if !s.pronunciation.is_empty() {
            v.pronunciation = Some(s.pronunciation.clone());
        }
        if s.homonym_count == 1 {
            if !s.pos.is_empty() {
                v.pos = Some(s.pos.clone());
            }
        } else {
            stats.homonyms_flagged.push(v.headword.clone());
        }
        if let Some(fp) = &s.fem_pron {
            v.fem_pron = Some(fp.clone());
        }
    }
    (out, stats)
}
