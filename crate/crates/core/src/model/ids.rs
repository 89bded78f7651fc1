//! Entry and axie identifiers.
//!
//! Entry ids look like `fra.abondant.27.e`; axie ids look like
//! `axi.[fra:abondant,khm:sambō].27.1.e`. Characters that would make the
//! grammar ambiguous (`. , [ ] :`) and `%` itself are percent-escaped inside
//! headwords, so every id parses back to the value it was rendered from.

use std::fmt;
use std::str::FromStr;

use super::ModelError;

const ESCAPED: &[char] = &['%', '.', ',', '[', ']', ':'];

pub fn escape_headword(headword: &str) -> String {
    let mut out = String::with_capacity(headword.len());
    for c in headword.chars() {
        if ESCAPED.contains(&c) {
            out.push_str(&format!("%{:02X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

pub fn unescape_headword(escaped: &str) -> Result<String, ModelError> {
    let mut out = String::with_capacity(escaped.len());
    let mut chars = escaped.chars();
    while let Some(c) = chars.next() {
        if ESCAPED[1..].contains(&c) {
            return Err(ModelError::InvalidId(format!(
                "unescaped '{c}' in headword segment {escaped:?}"
            )));
        }
        if c != '%' {
            out.push(c);
            continue;
        }
        let hex: String = chars.by_ref().take(2).collect();
        let decoded = u8::from_str_radix(&hex, 16)
            .ok()
            .filter(|_| hex.len() == 2 && hex == hex.to_uppercase())
            .map(char::from)
            .filter(|c| ESCAPED.contains(c))
            .ok_or_else(|| ModelError::InvalidId(format!("bad escape %{hex} in {escaped:?}")))?;
        out.push(decoded);
    }
    Ok(out)
}

fn check_lang(lang: &str) -> Result<(), ModelError> {
    if lang.len() == 3 && lang.bytes().all(|b| b.is_ascii_lowercase()) {
        Ok(())
    } else {
        Err(ModelError::InvalidInput(format!(
            "language code must be 3 lowercase letters, got {lang:?}"
        )))
    }
}

fn parse_positive(s: &str, what: &str, id: &str) -> Result<u32, ModelError> {
    match s.parse::<u32>() {
        Ok(n) if n >= 1 && !s.starts_with('0') && !s.starts_with('+') => Ok(n),
        _ => Err(ModelError::InvalidId(format!(
            "{what} must be a positive integer in {id:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryId {
    lang: String,
    headword: String,
    ordinal: u32,
}

impl EntryId {
    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn headword(&self) -> &str {
        &self.headword
    }

    pub fn ordinal(&self) -> u32 {
        self.ordinal
    }
}

/// Build the id of the `ordinal`-th entry of a volume.
pub fn make_entry_id(lang: &str, headword: &str, ordinal: u32) -> Result<EntryId, ModelError> {
    check_lang(lang)?;
    if headword.is_empty() {
        return Err(ModelError::InvalidInput("empty headword".into()));
    }
    if ordinal == 0 {
        return Err(ModelError::InvalidInput("ordinal must be >= 1".into()));
    }
    Ok(EntryId {
        lang: lang.to_owned(),
        headword: headword.to_owned(),
        ordinal,
    })
}

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}.{}.e",
            self.lang,
            escape_headword(&self.headword),
            self.ordinal
        )
    }
}

impl FromStr for EntryId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_suffix(".e")
            .ok_or_else(|| ModelError::InvalidId(format!("entry id must end with .e: {s:?}")))?;
        let (rest, ordinal) = body
            .rsplit_once('.')
            .ok_or_else(|| ModelError::InvalidId(format!("missing ordinal in {s:?}")))?;
        let (lang, headword) = rest
            .split_once('.')
            .ok_or_else(|| ModelError::InvalidId(format!("missing language in {s:?}")))?;
        check_lang(lang).map_err(|_| ModelError::InvalidId(format!("bad language in {s:?}")))?;
        let headword = unescape_headword(headword)?;
        if headword.is_empty() {
            return Err(ModelError::InvalidId(format!("empty headword in {s:?}")));
        }
        Ok(EntryId {
            lang: lang.to_owned(),
            headword,
            ordinal: parse_positive(ordinal, "ordinal", s)?,
        })
    }
}

/// Identifier of a pivot entry. The bracket carries the two headwords the
/// axie was created from; the trailing numbers are the ordinal of the source
/// entry and the index of the (sense, translation) pair within it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxieId {
    source: (String, String),
    target: (String, String),
    ordinal: u32,
    sense_index: u32,
}

impl AxieId {
    pub fn new(
        source_lang: &str,
        source_headword: &str,
        target_lang: &str,
        target_headword: &str,
        ordinal: u32,
        sense_index: u32,
    ) -> Result<AxieId, ModelError> {
        check_lang(source_lang)?;
        check_lang(target_lang)?;
        if source_headword.is_empty() || target_headword.is_empty() {
            return Err(ModelError::InvalidInput("empty headword in axie id".into()));
        }
        if ordinal == 0 || sense_index == 0 {
            return Err(ModelError::InvalidInput(
                "axie ordinal and sense index must be >= 1".into(),
            ));
        }
        Ok(AxieId {
            source: (source_lang.to_owned(), source_headword.to_owned()),
            target: (target_lang.to_owned(), target_headword.to_owned()),
            ordinal,
            sense_index,
        })
    }

    pub fn source_lang(&self) -> &str {
        &self.source.0
    }

    pub fn source_headword(&self) -> &str {
        &self.source.1
    }

    pub fn target_lang(&self) -> &str {
        &self.target.0
    }

    pub fn target_headword(&self) -> &str {
        &self.target.1
    }

    pub fn ordinal(&self) -> u32 {
        self.ordinal
    }

    pub fn sense_index(&self) -> u32 {
        self.sense_index
    }
}

pub fn make_axie_id(
    fr_headword: &str,
    khm_translit: &str,
    ordinal: u32,
    sense_index: u32,
) -> Result<AxieId, ModelError> {
    AxieId::new(
        "fra",
        fr_headword,
        "khm",
        khm_translit,
        ordinal,
        sense_index,
    )
}

impl fmt::Display for AxieId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "axi.[{}:{},{}:{}].{}.{}.e",
            self.source.0,
            escape_headword(&self.source.1),
            self.target.0,
            escape_headword(&self.target.1),
            self.ordinal,
            self.sense_index
        )
    }
}

impl FromStr for AxieId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| ModelError::InvalidId(format!("{why}: {s:?}"));
        let body = s
            .strip_prefix("axi.[")
            .and_then(|b| b.strip_suffix(".e"))
            .ok_or_else(|| bad("axie id must look like axi.[..].n.k.e"))?;
        let (pair, numbers) = body
            .split_once("].")
            .ok_or_else(|| bad("unclosed bracket"))?;
        let (left, right) = pair.split_once(',').ok_or_else(|| bad("missing ','"))?;
        let (l1, h1) = left.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let (l2, h2) = right.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let (ordinal, sense) = numbers
            .split_once('.')
            .ok_or_else(|| bad("missing index"))?;
        let ordinal = parse_positive(ordinal, "ordinal", s)?;
        let sense = parse_positive(sense, "sense index", s)?;
        AxieId::new(
            l1,
            &unescape_headword(h1)?,
            l2,
            &unescape_headword(h2)?,
            ordinal,
            sense,
        )
        .map_err(|e| bad(&e.to_string()))
    }
}
