//! Append-only storage of provenance-stamped answers, and assembly of
//! point-in-time FactSheets from them.
//!
//! Every answer is a [`FactRecord`] appended to the log of its subject
//! (`<subject_id>__<subject_version>.factlog`, one JSON object per line).
//! Records are never rewritten. A correction is a new record that
//! `supersedes` an earlier one, so the full lineage of every fact survives.

mod assemble;
pub mod catalog;
mod store;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use assemble::assemble;
pub use catalog::{CatalogError, PutOutcome, TemplateCatalog};
pub use store::{CorruptLine, FactError, HistoryEntry, Store, StoreError, SubjectSummary};

use crate::lifecycle::{Role, Source, Stage};
use crate::template::{AnswerSpec, TemplateRef};
use crate::time::Timestamp;

/// An answer, tagged with the kind of question it answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnswerValue {
    Text { value: String },
    Longtext { value: String },
    Number { value: f64, unit: Option<String> },
    Metricset { values: BTreeMap<String, f64> },
    Enum { value: String },
    Uri { value: String },
    Flag { value: bool },
}

impl AnswerValue {
    pub fn text(value: impl Into<String>) -> Self {
        AnswerValue::Text { value: value.into() }
    }

    pub fn longtext(value: impl Into<String>) -> Self {
        AnswerValue::Longtext { value: value.into() }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AnswerValue::Text { .. } => "text",
            AnswerValue::Longtext { .. } => "longtext",
            AnswerValue::Number { .. } => "number",
            AnswerValue::Metricset { .. } => "metricset",
            AnswerValue::Enum { .. } => "enum",
            AnswerValue::Uri { .. } => "uri",
            AnswerValue::Flag { .. } => "flag",
        }
    }

    /// Checks that the value has the shape `spec` demands.
    ///
    /// Metric sets may be partial: any non-empty subset of the declared metrics is accepted.
    pub fn conforms_to(&self, spec: &AnswerSpec) -> Result<(), ConformanceError> {
        let mismatch = || ConformanceError::KindMismatch { expected: spec.kind_name(), found: self.kind_name() };
        match (spec, self) {
            (AnswerSpec::Text, AnswerValue::Text { .. })
            | (AnswerSpec::Longtext, AnswerValue::Longtext { .. })
            | (AnswerSpec::Uri, AnswerValue::Uri { .. })
            | (AnswerSpec::Flag, AnswerValue::Flag { .. }) => Ok(()),
            (AnswerSpec::Number { unit: declared }, AnswerValue::Number { value, unit }) => {
                if !value.is_finite() {
                    return Err(ConformanceError::NonFinite);
                }
                match (declared, unit) {
                    (_, None) => Ok(()),
                    (Some(d), Some(u)) if d == u => Ok(()),
                    (declared, Some(u)) => Err(ConformanceError::UnitMismatch { expected: declared.clone(), found: u.clone() }),
                }
            }
            (AnswerSpec::Metricset { metrics }, AnswerValue::Metricset { values }) => {
                if values.is_empty() {
                    return Err(ConformanceError::EmptyMetricset);
                }
                for (name, value) in values {
                    if !metrics.contains(name) {
                        return Err(ConformanceError::UndeclaredMetric { metric: name.clone(), declared: metrics.clone() });
                    }
                    if !value.is_finite() {
                        return Err(ConformanceError::NonFinite);
                    }
                }
                Ok(())
            }
            (AnswerSpec::Enum { choices }, AnswerValue::Enum { value }) => {
                if choices.contains(value) {
                    Ok(())
                } else {
                    Err(ConformanceError::NotAChoice { value: value.clone(), choices: choices.clone() })
                }
            }
            _ => Err(mismatch()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConformanceError {
    #[error("kind mismatch: question expects {expected}, got {found}")]
    KindMismatch { expected: &'static str, found: &'static str },
    #[error("enum value '{value}' is not one of [{}]", choices.join(", "))]
    NotAChoice { value: String, choices: Vec<String> },
    #[error("metric '{metric}' is not declared (declared: [{}])", declared.join(", "))]
    UndeclaredMetric { metric: String, declared: Vec<String> },
    #[error("metricset answer has no metrics")]
    EmptyMetricset,
    #[error("unit '{found}' does not match declared unit {}", expected.as_deref().map(|u| format!("'{u}'")).unwrap_or_else(|| "(none)".into()))]
    UnitMismatch { expected: Option<String>, found: String },
    #[error("numbers must be finite")]
    NonFinite,
}

/// An answer as submitted, before the store assigns `seq` and `record_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactDraft {
    pub subject_id: String,
    pub subject_version: String,
    pub question_id: String,
    /// Defaults to the stage of the question's producing role.
    #[serde(default)]
    pub stage: Option<Stage>,
    pub role: Role,
    pub author: String,
    pub recorded_at: Timestamp,
    /// Defaults to the question's declared source.
    #[serde(default)]
    pub source: Option<Source>,
    pub value: AnswerValue,
    #[serde(default)]
    pub supersedes: Option<String>,
}

/// One immutable line of a fact log. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactRecord {
    pub seq: u64,
    pub record_id: String,
    pub subject_id: String,
    pub subject_version: String,
    pub template_ref: TemplateRef,
    pub question_id: String,
    pub stage: Stage,
    pub role: Role,
    pub author: String,
    pub recorded_at: Timestamp,
    pub source: Source,
    pub value: AnswerValue,
    pub supersedes: Option<String>,
}

impl FactRecord {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            author: self.author.clone(),
            role: self.role.clone(),
            recorded_at: self.recorded_at,
            source: self.source,
            record_id: self.record_id.clone(),
        }
    }
}

/// Who recorded an answer, when, and how.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub author: String,
    pub role: Role,
    pub recorded_at: Timestamp,
    pub source: Source,
    pub record_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub value: AnswerValue,
    pub provenance: Provenance,
}

/// The current answers for one subject under one template, as of an instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactSheet {
    pub subject_id: String,
    pub subject_version: String,
    pub template_ref: TemplateRef,
    pub as_of: Timestamp,
    pub answers: BTreeMap<String, Answer>,
    /// Records at or before `as_of` that the template cannot show: their question
    /// was removed, or their value no longer fits the question's answer spec.
    pub orphaned: usize,
}

impl FactSheet {
    pub fn answered(&self, question_id: &str) -> Option<&Answer> {
        self.answers.get(question_id)
    }
}

/// Identifies one fact log.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubjectKey {
    pub subject_id: String,
    pub subject_version: String,
}

impl SubjectKey {
    pub fn new(subject_id: impl Into<String>, subject_version: impl Into<String>) -> Self {
        SubjectKey { subject_id: subject_id.into(), subject_version: subject_version.into() }
    }

    pub fn file_name(&self) -> String {
        format!("{}__{}.factlog", self.subject_id, self.subject_version)
    }

    /// Subject ids and versions become file names, so they are limited to
    /// `[A-Za-z0-9._-]`, must not start with a dot, and ids may not contain `__`.
    pub fn validate(&self) -> Result<(), String> {
        let ok = |s: &str| {
            !s.is_empty() && !s.starts_with('.') && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
        };
        if !ok(&self.subject_id) || self.subject_id.contains("__") {
            return Err(format!("invalid subject id '{}'", self.subject_id));
        }
        if !ok(&self.subject_version) {
            return Err(format!("invalid subject version '{}'", self.subject_version));
        }
        Ok(())
    }
}

impl fmt::Display for SubjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.subject_id, self.subject_version)
    }
}
