//! Failures and the JSON report written for them.

use std::fmt;
use std::path::Path;

use serde_json::json;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: Option<usize>,
    pub message: String,
}

impl Issue {
    pub fn new(message: impl Into<String>) -> Self {
        Issue {
            line: None,
            message: message.into(),
        }
    }

    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        Issue {
            line: Some(line),
            message: message.into(),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unreadable inputs.
    Usage(anyhow::Error),
    /// The data did not pass a check.
    Validation {
        stage: &'static str,
        issues: Vec<Issue>,
    },
    /// A stage could not run to completion.
    Stage {
        stage: &'static str,
        error: anyhow::Error,
    },
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn validation(stage: &'static str, issues: Vec<Issue>) -> Self {
        Failure::Validation { stage, issues }
    }

    pub fn stage(stage: &'static str, e: impl Into<anyhow::Error>) -> Self {
        Failure::Stage {
            stage,
            error: e.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validation { .. } | Failure::Stage { .. } => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) => write!(f, "{e:#}"),
            Failure::Validation { stage, issues } => {
                write!(f, "{stage}: {} problem(s)", issues.len())?;
                if let Some(first) = issues.first() {
                    match first.line {
                        Some(l) => write!(f, ", first at line {l}: {}", first.message)?,
                        None => write!(f, ", first: {}", first.message)?,
                    }
                }
                Ok(())
            }
            Failure::Stage { stage, error } => write!(f, "{stage}: {error:#}"),
        }
    }
}

pub struct Report(serde_json::Value);

impl Report {
    pub fn from_failure(command: &str, failure: &Failure) -> Self {
        let (kind, stage, issues) = match failure {
            Failure::Usage(e) => ("usage", None, vec![Issue::new(format!("{e:#}"))]),
            Failure::Validation { stage, issues } => ("validation", Some(*stage), issues.clone()),
            Failure::Stage { stage, error } => (
                "stage",
                Some(*stage),
                vec![Issue::new(format!("{error:#}"))],
            ),
        };
        let errors: Vec<_> = issues
            .iter()
            .map(|i| json!({ "line": i.line, "message": i.message }))
            .collect();
        Report(json!({
            "command": command,
            "kind": kind,
            "stage": stage,
            "exit_code": failure.exit_code(),
            "errors": errors,
        }))
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(&self.0)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
