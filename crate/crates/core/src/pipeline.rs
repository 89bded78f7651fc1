//! All stages chained in memory, for the `pipeline` command and for tests.

use thiserror::Error;

use crate::ingest::{tag_volume, LineError, TaggedVolume};
use crate::model::{AxieVolume, Volume};
use crate::reify::{check_integrity, reify_links, sort_volume, ReifyError};
use crate::restructure::{
    enrich_from_supplement, restructure_volume, EnrichStats, RestructureError, SupplementLexicon,
};
use crate::translit::{transliterate_volume, RuleSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{} source line(s) could not be tagged, first at line {}: {}", .0.len(), .0[0].line, .0[0].error)]
    Ingest(Vec<LineError>),
    #[error(transparent)]
    Restructure(#[from] RestructureError),
    #[error(transparent)]
    Reify(#[from] ReifyError),
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub tagged: TaggedVolume,
    pub restructured: Volume,
    pub enriched: Volume,
    pub enrich_stats: EnrichStats,
    pub french: Volume,
    pub axies: AxieVolume,
    /// Transliterated and sorted.
    pub khmer: Volume,
    /// Non-fatal findings of reification and transliteration.
    pub warnings: Vec<String>,
    /// Output of the integrity check on the three volumes.
    pub violations: Vec<String>,
}

pub fn run_pipeline(
    source: &str,
    supplement: &SupplementLexicon,
    rules: &RuleSet,
    name: &str,
) -> Result<PipelineOutput, PipelineError> {
    let outcome = tag_volume(source.lines());
    if !outcome.errors.is_empty() {
        return Err(PipelineError::Ingest(outcome.errors));
    }
    let tagged = outcome.volume;
    let restructured = restructure_volume(&tagged, name)?;
    let (enriched, enrich_stats) = enrich_from_supplement(&restructured, supplement);
    let reified = reify_links(&enriched)?;
    let mut warnings = reified.report;
    let mut khmer = reified.khmer;
    warnings.extend(transliterate_volume(&mut khmer, rules));
    let khmer = sort_volume(&khmer);
    let violations = check_integrity(&reified.french, &reified.axies, &khmer);
    Ok(PipelineOutput {
        tagged,
        restructured,
        enriched,
        enrich_stats,
        french: reified.french,
        axies: reified.axies,
        khmer,
        warnings,
        violations,
    })
}
