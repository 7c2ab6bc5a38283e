//! Interview and evaluation support: the built-in question banks, evaluation
//! sessions with flags and importance rankings, and the report that turns a
//! set of evaluations into template revision suggestions.

pub mod banks;
mod report;
mod sessions;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use report::{
    evaluation_report, FlagTally, ProposalStats, QuestionStats, ReportError, Suggestion, SuggestionAction,
    SuggestionReport, Thresholds,
};
pub use sessions::{EvalStore, EvalStoreError};

use crate::lifecycle::Role;
use crate::template::{Template, TemplateRef};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankKind {
    ConsumerInterview,
    ProducerInterview,
    TemplateChecklist,
    FillinChecklist,
    ContentEval,
    PresentationEval,
}

impl BankKind {
    pub const ALL: [BankKind; 6] = [
        BankKind::ConsumerInterview,
        BankKind::ProducerInterview,
        BankKind::TemplateChecklist,
        BankKind::FillinChecklist,
        BankKind::ContentEval,
        BankKind::PresentationEval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BankKind::ConsumerInterview => "consumer_interview",
            BankKind::ProducerInterview => "producer_interview",
            BankKind::TemplateChecklist => "template_checklist",
            BankKind::FillinChecklist => "fillin_checklist",
            BankKind::ContentEval => "content_eval",
            BankKind::PresentationEval => "presentation_eval",
        }
    }

    /// Evaluations look at a concrete FactSheet; the other kinds do not.
    pub fn is_evaluation(self) -> bool {
        matches!(self, BankKind::ContentEval | BankKind::PresentationEval)
    }

    pub fn items(self) -> &'static [&'static str] {
        match self {
            BankKind::ConsumerInterview => &banks::CONSUMER_INTERVIEW,
            BankKind::ProducerInterview => &banks::PRODUCER_INTERVIEW,
            BankKind::TemplateChecklist => &banks::TEMPLATE_CHECKLIST,
            BankKind::FillinChecklist => &banks::FILLIN_CHECKLIST,
            BankKind::ContentEval => &banks::CONTENT_EVAL,
            BankKind::PresentationEval => &banks::PRESENTATION_EVAL,
        }
    }
}

impl fmt::Display for BankKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown bank kind '{0}'")]
pub struct BadBankKind(pub String);

impl FromStr for BankKind {
    type Err = BadBankKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BankKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| BadBankKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBank {
    pub kind: BankKind,
    pub items: Vec<String>,
}

pub fn builtin_bank(kind: BankKind) -> QuestionBank {
    QuestionBank { kind, items: kind.items().iter().map(|s| s.to_string()).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Missing,
    Extraneous,
    Confusing,
    Misplaced,
    FormatIssue,
}

impl Flag {
    pub const ALL: [Flag; 5] = [Flag::Missing, Flag::Extraneous, Flag::Confusing, Flag::Misplaced, Flag::FormatIssue];

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Missing => "missing",
            Flag::Extraneous => "extraneous",
            Flag::Confusing => "confusing",
            Flag::Misplaced => "misplaced",
            Flag::FormatIssue => "format_issue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown flag '{0}' (missing, extraneous, confusing, misplaced, format_issue)")]
pub struct BadFlag(pub String);

impl FromStr for Flag {
    type Err = BadFlag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Flag::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| BadFlag(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposedItem {
    pub label: String,
    #[serde(default)]
    pub why: String,
    #[serde(default)]
    pub example: String,
}

/// Case-folded with whitespace runs collapsed; proposals with equal keys are the same item.
pub fn normalize_label(label: &str) -> String {
    label.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// One answer to one bank item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    /// 1-based position in the session's bank.
    pub item: usize,
    /// The FactSheet question the response is about, if any.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub flags: BTreeSet<Flag>,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub proposed_item: Option<ProposedItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    /// Most important first: question ids and proposed labels.
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluator {
    pub name: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRef {
    pub id: String,
    pub version: String,
}

/// What a caller supplies to open a session; the store assigns the id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDraft {
    pub kind: BankKind,
    pub template: TemplateRef,
    #[serde(default)]
    pub subject: Option<SubjectRef>,
    /// Restricts the ranked question set to one audience's view.
    #[serde(default)]
    pub audience: Option<String>,
    pub evaluator: Evaluator,
    #[serde(default)]
    pub created_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSession {
    pub id: String,
    pub kind: BankKind,
    pub template: TemplateRef,
    pub subject: Option<SubjectRef>,
    pub audience: Option<String>,
    pub evaluator: Evaluator,
    pub created_at: Timestamp,
    pub responses: Vec<Response>,
    pub ranking: Option<Ranking>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("{kind} sessions evaluate a concrete FactSheet and need a subject")]
    SubjectRequired { kind: BankKind },
    #[error("{kind} sessions are not about a concrete FactSheet; drop the subject")]
    SubjectNotAllowed { kind: BankKind },
    #[error("session is for {session}, not {template}")]
    TemplateMismatch { session: TemplateRef, template: TemplateRef },
    #[error("audience '{0}' is not declared by the template")]
    UnknownAudience(String),
    #[error("item {item} is out of range (the {kind} bank has {len} items)")]
    ItemOutOfRange { item: usize, kind: BankKind, len: usize },
    #[error("flag 'missing' needs a proposed item")]
    ProposalRequired,
    #[error("proposed item label is empty")]
    EmptyLabel,
    #[error("flags, targets and proposals only apply to evaluation sessions, not {0}")]
    NotAnEvaluation(BankKind),
    #[error("unknown target question '{0}'")]
    UnknownTarget(String),
    #[error("{0}")]
    Ranking(#[from] RankingError),
}

/// Why an ordering is not a permutation of the session's rankable elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("ranking is not a permutation:{}{}{}", list(" duplicate", duplicates), list(" missing", missing), list(" unknown", unknown))]
pub struct RankingError {
    pub duplicates: Vec<String>,
    pub missing: Vec<String>,
    pub unknown: Vec<String>,
}

fn list(label: &str, items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("{label} [{}]", items.join(", "))
    }
}

impl EvalSession {
    /// A fresh session with no responses.
    pub fn open(id: String, draft: SessionDraft, template: &Template) -> Result<EvalSession, SessionError> {
        match (&draft.subject, draft.kind.is_evaluation()) {
            (None, true) => return Err(SessionError::SubjectRequired { kind: draft.kind }),
            (Some(_), false) => return Err(SessionError::SubjectNotAllowed { kind: draft.kind }),
            _ => {}
        }
        if template.template_ref() != draft.template {
            return Err(SessionError::TemplateMismatch { session: draft.template, template: template.template_ref() });
        }
        if let Some(aud) = &draft.audience {
            if !template.audiences.contains(aud) {
                return Err(SessionError::UnknownAudience(aud.clone()));
            }
        }
        Ok(EvalSession {
            id,
            kind: draft.kind,
            template: draft.template,
            subject: draft.subject,
            audience: draft.audience,
            evaluator: draft.evaluator,
            created_at: draft.created_at.unwrap_or_else(Timestamp::now),
            responses: Vec::new(),
            ranking: None,
        })
    }

    fn check_template(&self, template: &Template) -> Result<(), SessionError> {
        if template.template_ref() == self.template {
            Ok(())
        } else {
            Err(SessionError::TemplateMismatch { session: self.template.clone(), template: template.template_ref() })
        }
    }

    fn visible_ids<'t>(&self, template: &'t Template) -> Vec<&'t str> {
        template
            .questions()
            .into_iter()
            .filter(|q| self.audience.as_deref().is_none_or(|a| q.visible_to(a)))
            .map(|q| q.id.as_str())
            .collect()
    }

    /// Stores a response. A later response for the same item and target
    /// replaces the earlier one.
    pub fn record_response(&mut self, response: Response, template: &Template) -> Result<(), SessionError> {
        self.check_template(template)?;
        let len = self.kind.items().len();
        if response.item == 0 || response.item > len {
            return Err(SessionError::ItemOutOfRange { item: response.item, kind: self.kind, len });
        }
        let annotated = !response.flags.is_empty() || response.target.is_some() || response.proposed_item.is_some();
        if annotated && !self.kind.is_evaluation() {
            return Err(SessionError::NotAnEvaluation(self.kind));
        }
        if response.flags.contains(&Flag::Missing) && response.proposed_item.is_none() {
            return Err(SessionError::ProposalRequired);
        }
        if let Some(p) = &response.proposed_item {
            if normalize_label(&p.label).is_empty() {
                return Err(SessionError::EmptyLabel);
            }
        }
        if let Some(target) = &response.target {
            if !self.visible_ids(template).contains(&target.as_str()) {
                return Err(SessionError::UnknownTarget(target.clone()));
            }
        }
        match self.responses.iter_mut().find(|r| r.item == response.item && r.target == response.target) {
            Some(slot) => *slot = response,
            None => self.responses.push(response),
        }
        Ok(())
    }

    /// Labels proposed in this session, first spelling of each normalized label.
    pub fn proposed_labels(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for p in self.responses.iter().filter_map(|r| r.proposed_item.as_ref()) {
            if seen.insert(normalize_label(&p.label)) {
                out.push(p.label.clone());
            }
        }
        out
    }

    /// Everything a ranking must order: the visible questions plus this session's proposals.
    pub fn rankable(&self, template: &Template) -> Vec<String> {
        let mut out: Vec<String> = self.visible_ids(template).into_iter().map(String::from).collect();
        out.extend(self.proposed_labels());
        out
    }

    /// Stores `order` as the session's ranking, replacing any earlier one.
    /// Proposed labels match by normalized form and are stored as first proposed.
    pub fn record_ranking(&mut self, order: Vec<String>, template: &Template) -> Result<(), SessionError> {
        self.check_template(template)?;
        if !self.kind.is_evaluation() {
            return Err(SessionError::NotAnEvaluation(self.kind));
        }
        let ids = self.visible_ids(template);
        let labels = self.proposed_labels();
        let canonical = |entry: &str| -> Option<String> {
            if ids.contains(&entry) {
                return Some(entry.to_string());
            }
            let key = normalize_label(entry);
            labels.iter().find(|l| normalize_label(l) == key).cloned()
        };
        let mut err = RankingError::default();
        let mut placed = BTreeSet::new();
        let mut stored = Vec::with_capacity(order.len());
        for entry in &order {
            match canonical(entry) {
                None => err.unknown.push(entry.clone()),
                Some(c) => {
                    if !placed.insert(c.clone()) && !err.duplicates.contains(&c) {
                        err.duplicates.push(c.clone());
                    }
                    stored.push(c);
                }
            }
        }
        err.missing = self.rankable(template).into_iter().filter(|e| !placed.contains(e)).collect();
        if err != RankingError::default() {
            return Err(err.into());
        }
        self.ranking = Some(Ranking { order: stored });
        Ok(())
    }
}
