//! IPA to Khmer script in three table-driven stages: normalization,
//! intermediate notation with consonant series, and generation.
//!
//! Rule tables are TSV rows `stage TAB pattern TAB replacement TAB context
//! [TAB note]`. Fields may use `\u{XXXX}` escapes. An empty context
//! disables a row. Rows whose pattern starts with `@` are directives.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::model::Volume;

const BUNDLED: [(&str, &str); 3] = [
    ("normalize.tsv", include_str!("../rules/normalize.tsv")),
    (
        "intermediate.tsv",
        include_str!("../rules/intermediate.tsv"),
    ),
    ("generate.tsv", include_str!("../rules/generate.tsv")),
];

/// Upper bound on normalization passes before giving up on a fixpoint.
const MAX_NORMALIZE_PASSES: usize = 16;

#[derive(Debug, Error)]
pub enum TranslitError {
    #[error("{file}:{line}: {message}")]
    Rules {
        file: String,
        line: usize,
        message: String,
    },
    #[error("no Khmer rendering for grapheme {grapheme:?} at token {offset}")]
    UntranslatableGrapheme { grapheme: String, offset: usize },
    #[error("cannot read rule file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Normalize,
    Intermediate,
    Generate,
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "normalize" => Ok(Stage::Normalize),
            "intermediate" => Ok(Stage::Intermediate),
            "generate" => Ok(Stage::Generate),
            other => Err(format!("unknown stage {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Any,
    WordInitial,
    WordFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    A,
    B,
    Untyped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Consonant,
    Vowel,
    Separator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedToken {
    pub grapheme: String,
    pub series: Series,
    pub kind: TokenKind,
}

impl TypedToken {
    pub fn new(grapheme: impl Into<String>, series: Series, kind: TokenKind) -> Self {
        TypedToken {
            grapheme: grapheme.into(),
            series,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// Pattern symbols as written in the table.
    pub symbols: Vec<String>,
    /// The symbols concatenated; this is what is matched.
    pub pattern: Vec<char>,
    pub replacement: String,
    /// `None` when the row is disabled.
    pub context: Option<Context>,
    pub note: Option<String>,
    pub line: usize,
}

impl Rule {
    pub fn new(pattern: &str, replacement: &str, context: Option<Context>) -> Self {
        let symbols: Vec<String> = pattern.split_whitespace().map(str::to_owned).collect();
        Rule {
            pattern: symbols.iter().flat_map(|s| s.chars()).collect(),
            symbols,
            replacement: replacement.to_owned(),
            context,
            note: None,
            line: 0,
        }
    }

    pub fn is_provisional(&self) -> bool {
        self.note
            .as_deref()
            .is_some_and(|n| n.starts_with("provisional"))
    }

    pub fn output_symbols(&self) -> Vec<String> {
        self.replacement
            .split_whitespace()
            .map(str::to_owned)
            .collect()
    }

    fn applies(&self, input: &[char], pos: usize) -> bool {
        let end = pos + self.pattern.len();
        if end > input.len() || input[pos..end] != self.pattern[..] {
            return false;
        }
        match self.context {
            None => false,
            Some(Context::Any) => true,
            Some(Context::WordInitial) => pos == 0 || is_boundary(input[pos - 1]),
            Some(Context::WordFinal) => end == input.len() || is_boundary(input[end]),
        }
    }
}

fn is_boundary(c: char) -> bool {
    c == '-' || c.is_whitespace()
}

fn is_combining(c: char) -> bool {
    matches!(c, '\u{0300}'..='\u{036F}')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece<'a> {
    Rule(&'a Rule),
    /// One character with its combining marks, matched by no rule.
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub stage: Stage,
    pub rules: Vec<Rule>,
}

impl RuleTable {
    pub fn new(stage: Stage) -> Self {
        RuleTable {
            stage,
            rules: Vec::new(),
        }
    }

    /// The longest enabled rule matching at `pos`; the earliest row wins ties.
    pub fn match_at(&self, input: &[char], pos: usize) -> Option<&Rule> {
        let mut best: Option<&Rule> = None;
        for rule in &self.rules {
            if rule.applies(input, pos) && best.is_none_or(|b| rule.pattern.len() > b.pattern.len())
            {
                best = Some(rule);
            }
        }
        best
    }

    /// Leftmost-longest segmentation of the whole input.
    pub fn matches(&self, input: &[char]) -> Vec<(usize, Piece<'_>)> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < input.len() {
            match self.match_at(input, pos) {
                Some(rule) => {
                    out.push((pos, Piece::Rule(rule)));
                    pos += rule.pattern.len();
                }
                None => {
                    let mut end = pos + 1;
                    while end < input.len() && is_combining(input[end]) {
                        end += 1;
                    }
                    out.push((pos, Piece::Literal(input[pos..end].iter().collect())));
                    pos = end;
                }
            }
        }
        out
    }

    /// One rewrite pass, replacements copied as written.
    pub fn rewrite(&self, input: &str) -> String {
        let chars: Vec<char> = input.chars().collect();
        self.matches(&chars)
            .into_iter()
            .map(|(_, piece)| match piece {
                Piece::Rule(r) => r.replacement.clone(),
                Piece::Literal(s) => s,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RuleSet {
    pub normalize: RuleTable,
    pub intermediate: RuleTable,
    pub generate: RuleTable,
    pub consonants: BTreeSet<String>,
    pub vowels: BTreeSet<String>,
    pub default_series: Series,
    renderings: HashMap<(String, Series), String>,
    alphabet: BTreeSet<char>,
}

fn unescape_field(field: &str) -> Result<String, String> {
    let mut out = String::with_capacity(field.len());
    let mut rest = field;
    while let Some(i) = rest.find("\\u{") {
        out.push_str(&rest[..i]);
        let after = &rest[i + 3..];
        let close = after.find('}').ok_or("unterminated \\u{ escape")?;
        let code = u32::from_str_radix(&after[..close], 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| format!("bad escape \\u{{{}}}", &after[..close]))?;
        out.push(code);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn parse_series(s: &str) -> Option<Series> {
    match s {
        "A" => Some(Series::A),
        "B" => Some(Series::B),
        _ => None,
    }
}

impl RuleSet {
    pub fn bundled() -> Self {
        Self::from_sources(BUNDLED.iter().map(|(n, t)| (n.to_string(), t.to_string())))
            .expect("bundled rule tables are valid")
    }

    /// Load every `*.tsv` file of a directory, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, TranslitError> {
        let io = |source| TranslitError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
            .collect();
        paths.sort();
        let mut sources = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|source| TranslitError::Io {
                path: p.clone(),
                source,
            })?;
            sources.push((p.display().to_string(), text));
        }
        Self::from_sources(sources)
    }

    pub fn from_tsv(text: &str) -> Result<Self, TranslitError> {
        Self::from_sources([("<rules>".to_string(), text.to_string())])
    }

    pub fn from_sources(
        sources: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, TranslitError> {
        let mut set = RuleSet {
            normalize: RuleTable::new(Stage::Normalize),
            intermediate: RuleTable::new(Stage::Intermediate),
            generate: RuleTable::new(Stage::Generate),
            consonants: BTreeSet::new(),
            vowels: BTreeSet::new(),
            default_series: Series::A,
            renderings: HashMap::new(),
            alphabet: BTreeSet::new(),
        };
        for (file, text) in sources {
            for (i, line) in text.lines().enumerate() {
                let bad = |message: String| TranslitError::Rules {
                    file: file.clone(),
                    line: i + 1,
                    message,
                };
                if line.trim().is_empty() || line.trim_start().starts_with('#') {
                    continue;
                }
                let cols = line
                    .split('\t')
                    .map(unescape_field)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(bad)?;
                if cols.len() < 3 {
                    return Err(bad(format!(
                        "expected at least 3 columns, found {}",
                        cols.len()
                    )));
                }
                let stage: Stage = cols[0].trim().parse().map_err(bad)?;
                let pattern = cols[1].trim();
                if let Some(directive) = pattern.strip_prefix('@') {
                    set.directive(stage, directive, &cols[2]).map_err(bad)?;
                    continue;
                }
                let context = match cols.get(3).map(|c| c.trim()).unwrap_or("") {
                    "" => None,
                    "any" => Some(Context::Any),
                    "word-initial" => Some(Context::WordInitial),
                    "word-final" => Some(Context::WordFinal),
                    other => return Err(bad(format!("unknown context {other:?}"))),
                };
                let mut rule = Rule::new(pattern, cols[2].trim(), context);
                if rule.pattern.is_empty() {
                    return Err(bad("empty pattern".into()));
                }
                rule.note = cols
                    .get(4)
                    .map(|n| n.trim().to_owned())
                    .filter(|n| !n.is_empty());
                rule.line = i + 1;
                match stage {
                    Stage::Normalize => set.normalize.rules.push(rule),
                    Stage::Intermediate => set.intermediate.rules.push(rule),
                    Stage::Generate => set.generate.rules.push(rule),
                }
            }
        }
        set.index()?;
        Ok(set)
    }

    fn directive(&mut self, stage: Stage, name: &str, value: &str) -> Result<(), String> {
        let list = || value.split_whitespace().map(str::to_owned);
        match (stage, name) {
            (Stage::Intermediate, "consonants") => self.consonants.extend(list()),
            (Stage::Intermediate, "vowels") => self.vowels.extend(list()),
            (Stage::Generate, "default-series") => {
                self.default_series = parse_series(value.trim())
                    .ok_or_else(|| format!("default series must be A or B, got {value:?}"))?
            }
            _ => return Err(format!("unknown directive @{name} for this stage")),
        }
        Ok(())
    }

    fn index(&mut self) -> Result<(), TranslitError> {
        for rule in self.generate.rules.iter().filter(|r| r.context.is_some()) {
            let key = match rule.symbols.as_slice() {
                [g] => (g.clone(), Series::Untyped),
                [g, s] if parse_series(s).is_some() => {
                    (g.clone(), parse_series(s).unwrap_or(Series::Untyped))
                }
                _ => {
                    return Err(TranslitError::Rules {
                        file: "generate".into(),
                        line: rule.line,
                        message: format!(
                            "generate pattern must be `grapheme [A|B]`, got {:?}",
                            rule.symbols
                        ),
                    })
                }
            };
            self.renderings
                .entry(key)
                .or_insert_with(|| rule.replacement.clone());
        }
        let symbols = self.consonants.iter().chain(&self.vowels);
        self.alphabet = symbols.flat_map(|s| s.chars()).collect();
        for rule in self.intermediate.rules.iter() {
            self.alphabet.extend(rule.pattern.iter().copied());
        }
        self.alphabet.insert('-');
        Ok(())
    }

    /// Khmer text for a grapheme in a series, `Series::Untyped` for vowels.
    pub fn rendering(&self, grapheme: &str, series: Series) -> Option<&str> {
        self.renderings
            .get(&(grapheme.to_owned(), series))
            .map(String::as_str)
    }

    /// Characters the intermediate stage knows about.
    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TranslitReport {
    /// Characters outside the table alphabet, passed through unchanged.
    pub passthrough: Vec<char>,
    /// Intermediate symbols that are neither consonants nor vowels.
    pub unknown_symbols: Vec<String>,
    /// Series markers with no untyped consonant right before them.
    pub orphan_markers: usize,
    /// Consonants rendered in the default series.
    pub low_confidence: Vec<String>,
}

impl TranslitReport {
    pub fn is_clean(&self) -> bool {
        self.is_complete() && self.low_confidence.is_empty()
    }

    /// Every character was covered by the tables, defaults aside.
    pub fn is_complete(&self) -> bool {
        self.passthrough.is_empty() && self.unknown_symbols.is_empty() && self.orphan_markers == 0
    }

    fn merge(&mut self, other: TranslitReport) {
        self.passthrough.extend(other.passthrough);
        self.unknown_symbols.extend(other.unknown_symbols);
        self.orphan_markers += other.orphan_markers;
        self.low_confidence.extend(other.low_confidence);
    }
}

/// Apply the normalization table until nothing changes.
pub fn normalize_ipa(s: &str, rules: &RuleSet) -> String {
    let mut current = s.to_owned();
    for _ in 0..MAX_NORMALIZE_PASSES {
        let next = rules.normalize.rewrite(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Characters of `s` the tables do not know; they pass through unchanged.
pub fn passthrough_chars(s: &str, rules: &RuleSet) -> Vec<char> {
    s.chars()
        .filter(|c| !c.is_whitespace() && !rules.alphabet.contains(c))
        .collect()
}

/// Intermediate symbols before series markers are attached, e.g.
/// `["b", "A", "ūə"]` for `būə`. Whitespace in the input is ignored.
pub fn intermediate_symbols(s: &str, rules: &RuleSet) -> Vec<String> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    for (_, piece) in rules.intermediate.matches(&chars) {
        match piece {
            Piece::Rule(r) => out.extend(r.output_symbols()),
            Piece::Literal(l) => out.push(l),
        }
    }
    out
}

/// Turn intermediate symbols into typed tokens, attaching each `A`/`B`
/// marker to the consonant just before it.
pub fn type_symbols<S: AsRef<str>>(
    symbols: &[S],
    rules: &RuleSet,
) -> (Vec<TypedToken>, TranslitReport) {
    let mut tokens: Vec<TypedToken> = Vec::new();
    let mut report = TranslitReport::default();
    for sym in symbols {
        let sym = sym.as_ref();
        if let Some(series) = parse_series(sym) {
            match tokens.last_mut() {
                Some(t) if t.kind == TokenKind::Consonant => {
                    if t.series == Series::Untyped {
                        t.series = series;
                    }
                }
                _ => report.orphan_markers += 1,
            }
            continue;
        }
        let kind = if sym == "-" {
            TokenKind::Separator
        } else if rules.consonants.contains(sym) {
            TokenKind::Consonant
        } else {
            if !rules.vowels.contains(sym) {
                report.unknown_symbols.push(sym.to_owned());
            }
            TokenKind::Vowel
        };
        tokens.push(TypedToken::new(sym, Series::Untyped, kind));
    }
    (tokens, report)
}

pub fn to_intermediate(s: &str, rules: &RuleSet) -> (Vec<TypedToken>, TranslitReport) {
    type_symbols(&intermediate_symbols(s, rules), rules)
}

/// Space-separated trace such as `b A ūə`.
pub fn render_trace(tokens: &[TypedToken]) -> String {
    let mut parts = Vec::new();
    for t in tokens {
        parts.push(t.grapheme.clone());
        match t.series {
            Series::A => parts.push("A".into()),
            Series::B => parts.push("B".into()),
            Series::Untyped => {}
        }
    }
    parts.join(" ")
}

/// Read a trace back into tokens.
pub fn parse_trace(trace: &str, rules: &RuleSet) -> (Vec<TypedToken>, TranslitReport) {
    let symbols: Vec<&str> = trace.split_whitespace().collect();
    type_symbols(&symbols, rules)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub text: String,
    /// Token offsets of consonants rendered in the default series.
    pub low_confidence: Vec<usize>,
}

pub fn generate_khmer(tokens: &[TypedToken], rules: &RuleSet) -> Result<Generated, TranslitError> {
    let mut text = String::new();
    let mut low_confidence = Vec::new();
    for (offset, t) in tokens.iter().enumerate() {
        let rendered = match t.kind {
            TokenKind::Separator => Some(""),
            TokenKind::Vowel => rules.rendering(&t.grapheme, Series::Untyped),
            TokenKind::Consonant => {
                let series = if t.series == Series::Untyped {
                    low_confidence.push(offset);
                    rules.default_series
                } else {
                    t.series
                };
                rules
                    .rendering(&t.grapheme, series)
                    .or_else(|| rules.rendering(&t.grapheme, Series::Untyped))
            }
        };
        let rendered = rendered.ok_or_else(|| TranslitError::UntranslatableGrapheme {
            grapheme: t.grapheme.clone(),
            offset,
        })?;
        text.push_str(rendered);
    }
    Ok(Generated {
        text,
        low_confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub normalized: String,
    pub intermediate: String,
    pub khmer: String,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "normalized:   {}", self.normalized)?;
        writeln!(f, "intermediate: {}", self.intermediate)?;
        write!(f, "khmer:        {}", self.khmer)
    }
}

/// All three stages, keeping each stage's output.
pub fn transliterate_traced(
    s: &str,
    rules: &RuleSet,
) -> Result<(Trace, TranslitReport), TranslitError> {
    let normalized = normalize_ipa(s, rules);
    let mut report = TranslitReport {
        passthrough: passthrough_chars(&normalized, rules),
        ..Default::default()
    };
    let (tokens, typing) = to_intermediate(&normalized, rules);
    report.merge(typing);
    let generated = generate_khmer(&tokens, rules)?;
    report.low_confidence = generated
        .low_confidence
        .iter()
        .map(|&i| tokens[i].grapheme.clone())
        .collect();
    Ok((
        Trace {
            normalized,
            intermediate: render_trace(&tokens),
            khmer: generated.text,
        },
        report,
    ))
}

pub fn transliterate(s: &str, rules: &RuleSet) -> Result<(String, TranslitReport), TranslitError> {
    transliterate_traced(s, rules).map(|(t, r)| (t.khmer, r))
}

/// Fill the script form of every entry from its IPA headword. Entries that
/// cannot be transliterated keep no script form and are reported.
pub fn transliterate_volume(volume: &mut Volume, rules: &RuleSet) -> Vec<String> {
    let mut report = Vec::new();
    for entry in &mut volume.entries {
        match transliterate(&entry.headword, rules) {
            Ok((text, r)) => {
                if !r.passthrough.is_empty() || !r.unknown_symbols.is_empty() {
                    report.push(format!(
                        "{}: passed through {:?}, unknown symbols {:?}",
                        entry.id, r.passthrough, r.unknown_symbols
                    ));
                }
                entry.writing = Some(text).filter(|t| !t.is_empty());
            }
            Err(e) => {
                report.push(format!("{}: {}", entry.id, e));
                entry.writing = None;
            }
        }
    }
    report
}
