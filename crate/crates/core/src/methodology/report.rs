use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{normalize_label, EvalSession, Flag};
use crate::render::format_number;
use crate::template::{Template, TemplateRef};

/// Minimum fraction of sessions that must agree before a suggestion is made.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub remove: f64,
    pub reword: f64,
    pub add: f64,
    #[serde(rename = "move")]
    pub move_: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { remove: 0.5, reword: 0.5, add: 0.5, move_: 0.5 }
    }
}

/// Number of sessions raising each flag against a question.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagTally {
    pub missing: usize,
    pub extraneous: usize,
    pub confusing: usize,
    pub misplaced: usize,
    pub format_issue: usize,
}

impl FlagTally {
    fn bump(&mut self, flag: Flag) {
        match flag {
            Flag::Missing => self.missing += 1,
            Flag::Extraneous => self.extraneous += 1,
            Flag::Confusing => self.confusing += 1,
            Flag::Misplaced => self.misplaced += 1,
            Flag::FormatIssue => self.format_issue += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStats {
    pub id: String,
    pub flags: FlagTally,
    /// Sessions whose ranking includes the question.
    pub ranked_by: usize,
    /// Mean 1-based position over the sessions that ranked it.
    pub mean_rank: Option<f64>,
    /// 1 (most important quarter) to 4 (least important quarter).
    pub quartile: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalStats {
    /// Normalized label.
    pub label: String,
    pub sessions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionAction {
    Remove,
    Reword,
    Move,
    Add,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub action: SuggestionAction,
    /// A question id, or the normalized label of a proposed item for `add`.
    pub target: String,
    /// Fraction of sessions supporting the suggestion.
    pub support: f64,
    /// Ids of the supporting sessions.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionReport {
    pub template: TemplateRef,
    pub sessions: Vec<String>,
    pub thresholds: Thresholds,
    pub questions: Vec<QuestionStats>,
    pub proposals: Vec<ProposalStats>,
    pub suggestions: Vec<Suggestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("no evaluation sessions to report on")]
    NoSessions,
    #[error("sessions cover more than one template: {}", .0.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "))]
    MixedTemplates(Vec<TemplateRef>),
    #[error("sessions are for {sessions}, not {template}")]
    TemplateMismatch { sessions: TemplateRef, template: TemplateRef },
}

/// Aggregates evaluation sessions into per-question statistics and revision
/// suggestions. Only content and presentation evaluations are counted;
/// interview and checklist sessions carry notes, not evidence.
///
/// Every fraction is over the number of evaluation sessions. Rank position
/// `p` in a ranking of `n` elements normalizes to `(p - 1) / (n - 1)`; a
/// question's quartile comes from the mean of those values over the sessions
/// that ranked it.
pub fn evaluation_report(
    sessions: &[EvalSession],
    template: &Template,
    thresholds: Thresholds,
) -> Result<SuggestionReport, ReportError> {
    let mut sessions: Vec<&EvalSession> = sessions.iter().filter(|s| s.kind.is_evaluation()).collect();
    if sessions.is_empty() {
        return Err(ReportError::NoSessions);
    }
    sessions.sort_by(|a, b| a.id.cmp(&b.id));
    let refs: BTreeSet<&TemplateRef> = sessions.iter().map(|s| &s.template).collect();
    if refs.len() > 1 {
        return Err(ReportError::MixedTemplates(refs.into_iter().cloned().collect()));
    }
    let template_ref = template.template_ref();
    if sessions[0].template != template_ref {
        return Err(ReportError::TemplateMismatch { sessions: sessions[0].template.clone(), template: template_ref });
    }
    let n = sessions.len() as f64;

    // question id -> flag -> sessions raising it
    let mut raised: BTreeMap<&str, BTreeMap<Flag, BTreeSet<&str>>> = BTreeMap::new();
    let mut proposals: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut positions: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for s in &sessions {
        for r in &s.responses {
            if let Some(target) = &r.target {
                let by_flag = raised.entry(target.as_str()).or_default();
                for flag in &r.flags {
                    by_flag.entry(*flag).or_default().insert(s.id.as_str());
                }
            }
            if let Some(p) = &r.proposed_item {
                proposals.entry(normalize_label(&p.label)).or_default().insert(s.id.as_str());
            }
        }
        if let Some(ranking) = &s.ranking {
            for (i, entry) in ranking.order.iter().enumerate() {
                positions.entry(entry.as_str()).or_default().push((i + 1, ranking.order.len()));
            }
        }
    }

    let mut questions = Vec::new();
    let mut suggestions = Vec::new();
    for q in template.questions() {
        let by_flag = raised.get(q.id.as_str());
        let voters = |flag: Flag| -> Vec<String> {
            by_flag.and_then(|m| m.get(&flag)).map(|set| set.iter().map(|s| s.to_string()).collect()).unwrap_or_default()
        };
        let mut flags = FlagTally::default();
        if let Some(m) = by_flag {
            for (flag, set) in m {
                for _ in set {
                    flags.bump(*flag);
                }
            }
        }
        let ranks = positions.get(q.id.as_str()).map(Vec::as_slice).unwrap_or_default();
        let (mean_rank, quartile) = if ranks.is_empty() {
            (None, None)
        } else {
            let count = ranks.len() as f64;
            let mean = ranks.iter().map(|(p, _)| *p as f64).sum::<f64>() / count;
            let spread = ranks
                .iter()
                .map(|&(p, len)| if len > 1 { (p - 1) as f64 / (len - 1) as f64 } else { 0.0 })
                .sum::<f64>()
                / count;
            (Some(mean), Some(((spread * 4.0).floor() as u8 + 1).min(4)))
        };

        let mut consider = |action, flag, threshold: f64, extra: bool| {
            let evidence = voters(flag);
            let support = evidence.len() as f64 / n;
            if !evidence.is_empty() && support >= threshold && extra {
                suggestions.push(Suggestion { action, target: q.id.clone(), support, evidence });
            }
        };
        consider(SuggestionAction::Remove, Flag::Extraneous, thresholds.remove, quartile == Some(4));
        consider(SuggestionAction::Reword, Flag::Confusing, thresholds.reword, true);
        consider(SuggestionAction::Move, Flag::Misplaced, thresholds.move_, true);

        questions.push(QuestionStats { id: q.id.clone(), flags, ranked_by: ranks.len(), mean_rank, quartile });
    }

    let proposals: Vec<ProposalStats> = proposals
        .into_iter()
        .map(|(label, set)| ProposalStats { label, sessions: set.into_iter().map(String::from).collect() })
        .collect();
    for p in &proposals {
        let support = p.sessions.len() as f64 / n;
        if support >= thresholds.add {
            suggestions.push(Suggestion {
                action: SuggestionAction::Add,
                target: p.label.clone(),
                support,
                evidence: p.sessions.clone(),
            });
        }
    }

    Ok(SuggestionReport {
        template: template_ref,
        sessions: sessions.iter().map(|s| s.id.clone()).collect(),
        thresholds,
        questions,
        proposals,
        suggestions,
    })
}

impl SuggestionAction {
    pub fn as_str(self) -> &'static str {
        match self {
            SuggestionAction::Remove => "remove",
            SuggestionAction::Reword => "reword",
            SuggestionAction::Move => "move",
            SuggestionAction::Add => "add",
        }
    }
}

impl SuggestionReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "Evaluation report for {} ({} sessions)", self.template, self.sessions.len()).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "id      missing extraneous confusing misplaced format  mean_rank quartile").unwrap();
        for q in &self.questions {
            let f = &q.flags;
            let mean = q.mean_rank.map(format_number).unwrap_or_else(|| "-".into());
            let quartile = q.quartile.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:<7} {:>7} {:>10} {:>9} {:>9} {:>6}  {:>9} {:>8}",
                q.id, f.missing, f.extraneous, f.confusing, f.misplaced, f.format_issue, mean, quartile
            )
            .unwrap();
        }
        if !self.proposals.is_empty() {
            writeln!(out).unwrap();
            writeln!(out, "Proposed items:").unwrap();
            for p in &self.proposals {
                writeln!(out, "  \"{}\" ({})", p.label, p.sessions.join(", ")).unwrap();
            }
        }
        writeln!(out).unwrap();
        if self.suggestions.is_empty() {
            writeln!(out, "No suggestions.").unwrap();
        } else {
            writeln!(out, "Suggestions:").unwrap();
            for s in &self.suggestions {
                let target = if s.action == SuggestionAction::Add { format!("\"{}\"", s.target) } else { s.target.clone() };
                writeln!(
                    out,
                    "  {} {target}: support {} ({})",
                    s.action.as_str(),
                    format_number(s.support),
                    s.evidence.join(", ")
                )
                .unwrap();
            }
        }
        out
    }
}
