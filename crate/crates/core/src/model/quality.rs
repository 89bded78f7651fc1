//! Quality levels on data and skill levels on contributors.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Number of validated contributions that promotes a contributor by one level.
pub const DEFAULT_PROMOTION_THRESHOLD: u32 = 10;

/// One to five stars. 1 is unreviewed recovered data, 5 is expert-certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct QualityLevel(u8);

impl QualityLevel {
    pub const DRAFT: QualityLevel = QualityLevel(1);
    pub const EXPERT: QualityLevel = QualityLevel(5);

    pub fn new(stars: u8) -> Result<Self, ModelError> {
        if (1..=5).contains(&stars) {
            Ok(QualityLevel(stars))
        } else {
            Err(ModelError::InvalidInput(format!(
                "level must be 1..=5, got {stars}"
            )))
        }
    }

    pub fn stars(self) -> u8 {
        self.0
    }

    /// Parse the XML attribute form, where the empty string means "not yet assigned".
    pub fn parse_attr(value: &str) -> Result<Option<Self>, ModelError> {
        if value.is_empty() {
            return Ok(None);
        }
        let stars = value
            .parse::<u8>()
            .map_err(|_| ModelError::InvalidInput(format!("bad level {value:?}")))?;
        QualityLevel::new(stars).map(Some)
    }

    pub fn attr(level: Option<Self>) -> String {
        level.map(|l| l.0.to_string()).unwrap_or_default()
    }
}

impl TryFrom<u8> for QualityLevel {
    type Error = ModelError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        QualityLevel::new(v)
    }
}

impl From<QualityLevel> for u8 {
    fn from(l: QualityLevel) -> u8 {
        l.0
    }
}

impl fmt::Display for QualityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contributor {
    pub name: String,
    pub skill: QualityLevel,
    #[serde(default)]
    pub validated_streak: u32,
}

impl Contributor {
    pub fn new(name: impl Into<String>, skill: QualityLevel) -> Self {
        Contributor {
            name: name.into(),
            skill,
            validated_streak: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReviewOutcome {
    Validated,
    Corrected,
}

/// Level of a piece of data after `reviser` has worked on it. Levels never go down.
pub fn revised_level(current: Option<QualityLevel>, reviser: &Contributor) -> QualityLevel {
    current.unwrap_or(QualityLevel::DRAFT).max(reviser.skill)
}

pub fn update_contributor_streak(contributor: &Contributor, outcome: ReviewOutcome) -> Contributor {
    update_contributor_streak_with(contributor, outcome, DEFAULT_PROMOTION_THRESHOLD)
}

/// Skill stops at 5; past that the streak keeps counting without promoting.
pub fn update_contributor_streak_with(
    contributor: &Contributor,
    outcome: ReviewOutcome,
    threshold: u32,
) -> Contributor {
    let mut next = contributor.clone();
    match outcome {
        ReviewOutcome::Corrected => next.validated_streak = 0,
        ReviewOutcome::Validated => {
            next.validated_streak += 1;
            if next.validated_streak >= threshold && next.skill < QualityLevel::EXPERT {
                next.skill = QualityLevel(next.skill.0 + 1);
                next.validated_streak = 0;
            }
        }
    }
    next
}

/// Apply a review of `author`'s work by `reviewer`. A validation only counts
/// toward promotion when the reviewer's skill is strictly higher; a
/// correction resets the streak whoever makes it.
pub fn record_review(
    author: &Contributor,
    reviewer: &Contributor,
    outcome: ReviewOutcome,
) -> Contributor {
    match outcome {
        ReviewOutcome::Validated if reviewer.skill <= author.skill => author.clone(),
        _ => update_contributor_streak(author, outcome),
    }
}
