//! Source dictionary lines to tagged XML.
//!
//! A source line holds the French column and the Khmer column separated by
//! a TAB. Senses are separated by ` — ` in both columns and alternative
//! translations of one sense by ` / `. Lines starting with `#` are comments.

use quick_xml::escape::partial_escape;
use thiserror::Error;

use crate::xml::{self, Element, XmlError};

pub const SENSE_DELIMITER: &str = " — ";
pub const ALTERNATIVE_DELIMITER: &str = " / ";

/// Part-of-speech abbreviations recognised in parentheses in the first
/// French segment. They stay in the gloss; the hint is only recorded.
const POS_ABBREVIATIONS: &[&str] = &[
    "adj.", "adv.", "art.", "conj.", "interj.", "loc.", "n.", "n.f.", "n.m.", "num.", "prép.",
    "pron.", "v.", "v.i.", "v.pr.", "v.t.",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("sense count mismatch: {french} French segment(s) but {khmer} Khmer segment(s)")]
    Alignment { french: usize, khmer: usize },
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("invalid tagged article {article}: {message}")]
    Schema { article: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSense {
    pub gloss: String,
    pub translations_ipa: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEntry {
    pub headword: String,
    pub fem_suffix: Option<String>,
    pub pos_hint: Option<String>,
    pub senses: Vec<RawSense>,
}

/// The part of the first French segment that names the entry, before any
/// parenthesised note, e.g. `abondant, e` in `abondant, e (fruits, riz...)`.
pub fn entry_form(first_segment: &str) -> &str {
    first_segment.split('(').next().unwrap_or_default().trim()
}

pub fn pos_hint(segment: &str) -> Option<String> {
    let mut rest = segment;
    while let Some(open) = rest.find('(') {
        let after = &rest[open + 1..];
        let close = after.find(')')?;
        let inner = after[..close].trim();
        if POS_ABBREVIATIONS.contains(&inner) {
            return Some(inner.to_owned());
        }
        rest = &after[close + 1..];
    }
    None
}

pub fn parse_source_line(line: &str) -> Result<RawEntry, IngestError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let (french, khmer) = line
        .split_once('\t')
        .ok_or_else(|| IngestError::MalformedLine("missing TAB between the two columns".into()))?;
    let french: Vec<&str> = french.split(SENSE_DELIMITER).map(str::trim).collect();
    let khmer: Vec<&str> = khmer.split(SENSE_DELIMITER).map(str::trim).collect();
    if french.len() != khmer.len() {
        return Err(IngestError::Alignment {
            french: french.len(),
            khmer: khmer.len(),
        });
    }
    let form = entry_form(french[0]);
    let (headword, _) = split_feminine(form);
    if headword.is_empty() {
        return Err(IngestError::MalformedLine("empty headword".into()));
    }
    let fem_suffix = form
        .split_once(", ")
        .map(|(_, s)| s.trim().to_owned())
        .filter(|s| !s.is_empty());

    let mut senses = Vec::with_capacity(french.len());
    for (i, (gloss, translations)) in french.iter().zip(&khmer).enumerate() {
        if gloss.is_empty() {
            return Err(IngestError::MalformedLine(format!(
                "empty gloss in sense {}",
                i + 1
            )));
        }
        let alternatives: Vec<String> = translations
            .split(ALTERNATIVE_DELIMITER)
            .map(|t| t.trim().to_owned())
            .collect();
        if alternatives.iter().any(String::is_empty) {
            return Err(IngestError::MalformedLine(format!(
                "empty translation in sense {}",
                i + 1
            )));
        }
        senses.push(RawSense {
            gloss: (*gloss).to_owned(),
            translations_ipa: alternatives,
        });
    }
    Ok(RawEntry {
        headword,
        fem_suffix,
        pos_hint: pos_hint(french[0]),
        senses,
    })
}

fn fold(c: char) -> char {
    match c {
        'à' | 'â' | 'ä' => 'a',
        'é' | 'è' | 'ê' | 'ë' => 'e',
        'î' | 'ï' => 'i',
        'ô' | 'ö' => 'o',
        'ù' | 'û' | 'ü' => 'u',
        'ç' => 'c',
        other => other,
    }
}

fn is_vowel(c: char) -> bool {
    matches!(fold(c), 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Feminine form from a masculine headword and the suffix printed after the comma.
///
/// * a one-letter suffix is appended (`abondant, e`);
/// * a consonant + `e` suffix doubles a matching final consonant (`bon, ne`)
///   or replaces a different one (`neuf, ve`);
/// * a vowel-initial two-letter suffix is appended (`long, ue`);
/// * a longer suffix replaces the masculine from the last letter matching
///   its first letter, accents ignored (`heureux, euse`, `beau, belle`),
///   or replaces the final letter when none matches (`public, que`).
pub fn feminine_form(masculine: &str, suffix: &str) -> String {
    let m: Vec<char> = masculine.chars().collect();
    let s: Vec<char> = suffix.chars().collect();
    let (Some(&first), Some(&last_m)) = (s.first(), m.last()) else {
        return format!("{masculine}{suffix}");
    };
    let replace_last = || m[..m.len() - 1].iter().chain(&s).collect::<String>();
    match s.len() {
        1 => format!("{masculine}{suffix}"),
        2 if s[1] == 'e' && !is_vowel(first) => {
            if fold(first) == fold(last_m) {
                format!("{masculine}{suffix}")
            } else {
                replace_last()
            }
        }
        2 if is_vowel(first) => format!("{masculine}{suffix}"),
        _ => match m.iter().rposition(|&c| fold(c) == fold(first)) {
            Some(p) => m[..p].iter().chain(&s).collect(),
            None => replace_last(),
        },
    }
}

/// Split `abondant, e` into (`abondant`, `abondante`). Forms without `, `
/// come back unchanged.
pub fn split_feminine(raw_headword: &str) -> (String, Option<String>) {
    match raw_headword.split_once(", ") {
        Some((m, suffix)) if !suffix.trim().is_empty() && !m.trim().is_empty() => {
            let m = m.trim();
            (m.to_owned(), Some(feminine_form(m, suffix.trim())))
        }
        _ => (raw_headword.trim().to_owned(), None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSense {
    pub glose: String,
    pub api: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedArticle {
    pub vedette: String,
    pub senses: Vec<TaggedSense>,
}

impl From<&RawEntry> for TaggedArticle {
    fn from(raw: &RawEntry) -> Self {
        TaggedArticle {
            vedette: raw.headword.clone(),
            senses: raw
                .senses
                .iter()
                .map(|s| TaggedSense {
                    glose: s.gloss.clone(),
                    api: s.translations_ipa.clone(),
                })
                .collect(),
        }
    }
}

impl TaggedArticle {
    /// The article in the layout of the hand-tagged conversion files.
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<article>\n");
        out.push_str(&format!(
            "<vedette>{}</vedette>\n",
            partial_escape(self.vedette.as_str())
        ));
        for sense in &self.senses {
            out.push_str("<sens>\n");
            out.push_str(&format!(
                "<glose>{}</glose>\n",
                partial_escape(sense.glose.as_str())
            ));
            for (i, api) in sense.api.iter().enumerate() {
                out.push_str(&format!(
                    "<traduction><api>{}</api>\n</traduction>",
                    partial_escape(api.as_str())
                ));
                if i + 1 < sense.api.len() {
                    out.push('\n');
                }
            }
            out.push_str("</sens>\n");
        }
        out.push_str("</article>\n");
        out
    }

    pub fn from_element(el: &Element, index: usize) -> Result<Self, IngestError> {
        let bad = |message: String| IngestError::Schema {
            article: index,
            message,
        };
        if el.name != "article" {
            return Err(bad(format!("expected <article>, found <{}>", el.name)));
        }
        let mut children = el.elements();
        let vedette = match children.next() {
            Some(v) if v.name == "vedette" && v.elements().next().is_none() => v.text(),
            _ => return Err(bad("article must start with <vedette>".into())),
        };
        if vedette.trim().is_empty() {
            return Err(bad("empty <vedette>".into()));
        }
        let mut senses = Vec::new();
        for sens in children {
            if sens.name != "sens" {
                return Err(bad(format!("unexpected <{}> in <article>", sens.name)));
            }
            let mut parts = sens.elements();
            let glose = match parts.next() {
                Some(g) if g.name == "glose" && g.elements().next().is_none() => g.text(),
                _ => return Err(bad("<sens> must start with <glose>".into())),
            };
            let mut api = Vec::new();
            for t in parts {
                let apis: Vec<&Element> = t.elements().collect();
                if t.name != "traduction" || apis.len() != 1 || apis[0].name != "api" {
                    return Err(bad(format!(
                        "<{}> is not a <traduction> holding one <api>",
                        t.name
                    )));
                }
                api.push(apis[0].text());
            }
            if api.is_empty() {
                return Err(bad("<sens> without <traduction>".into()));
            }
            senses.push(TaggedSense { glose, api });
        }
        if senses.is_empty() {
            return Err(bad("article without <sens>".into()));
        }
        Ok(TaggedArticle { vedette, senses })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedVolume {
    pub articles: Vec<TaggedArticle>,
}

impl TaggedVolume {
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<volume>\n");
        for a in &self.articles {
            out.push_str(&a.to_xml());
        }
        out.push_str("</volume>\n");
        out
    }

    /// Parse and validate a tagged volume; the first schema violation is reported.
    pub fn from_xml(src: &str) -> Result<Self, IngestError> {
        let doc = xml::parse(src)?;
        if doc.root.name != "volume" {
            return Err(IngestError::Schema {
                article: 0,
                message: format!("root must be <volume>, found <{}>", doc.root.name),
            });
        }
        let articles = doc
            .root
            .elements()
            .enumerate()
            .map(|(i, el)| TaggedArticle::from_element(el, i + 1))
            .collect::<Result<_, _>>()?;
        Ok(TaggedVolume { articles })
    }

    pub fn sense_count(&self) -> usize {
        self.articles.iter().map(|a| a.senses.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    /// 1-based line number in the source file.
    pub line: usize,
    pub error: IngestError,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagOutcome {
    pub volume: TaggedVolume,
    pub errors: Vec<LineError>,
}

/// Tag every line; lines that fail to parse are reported and skipped.
pub fn tag_volume<'a>(lines: impl IntoIterator<Item = &'a str>) -> TagOutcome {
    let mut outcome = TagOutcome::default();
    for (i, line) in lines.into_iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_source_line(line) {
            Ok(raw) => outcome.volume.articles.push(TaggedArticle::from(&raw)),
            Err(error) => outcome.errors.push(LineError { line: i + 1, error }),
        }
    }
    outcome
}
