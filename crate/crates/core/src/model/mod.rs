//! Domain types of the three-volume pivot dictionary.

mod entry;
mod ids;
mod links;
mod quality;

use thiserror::Error;

pub use entry::{
    read_volume_root, sense_id, sense_index, volume_root, Axie, AxieRef, AxieVolume, Lexie, Refine,
    Vocable, VocableLink, Volume, AXIE_LANG,
};
pub use ids::{escape_headword, make_axie_id, make_entry_id, unescape_headword, AxieId, EntryId};
pub use links::{
    add_translation_link, fresh_axie_id, infer_transitive_links, ref_sense_index, revise_entry,
    LinkCase, LinkEnd, LinkOutcome, LinkRequest, VolumeSet,
};
pub use quality::{
    record_review, revised_level, update_contributor_streak, update_contributor_streak_with,
    Contributor, QualityLevel, ReviewOutcome, DEFAULT_PROMOTION_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid identifier: {0}")]
    InvalidId(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("schema violation in <{element}>: {message}")]
    Schema { element: String, message: String },
}
