//! Building blocks of a pivot French–Khmer lexical database: source
//! ingestion, restructuring into `m:` entries, link reification through an
//! axie volume, rule-driven IPA to Khmer script transliteration, and an
//! indexed XML store with optimistic revisions.

pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod reify;
pub mod restructure;
pub mod store;
pub mod translit;
pub mod xml;
