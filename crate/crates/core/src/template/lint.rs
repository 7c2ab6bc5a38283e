use std::fmt;

use serde::Serialize;

use super::{Section, Template};
use crate::lifecycle::Source;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    EmptySection,
    EmptyForAudience,
    AudienceSeesNothing,
    NoKeyQuestion,
    NoRiskQuestion,
    AutoWithoutHint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}", self.message)
    }
}

fn warn(kind: WarningKind, message: String) -> Warning {
    Warning { kind, message }
}

/// Style checks on a valid template. Nothing here prevents the template from being used.
pub fn lint_template(t: &Template) -> Vec<Warning> {
    let mut out = Vec::new();
    let mut all_sections: Vec<(String, &Section)> = Vec::new();
    for section in &t.sections {
        all_sections.push((section.title.clone(), section));
        for sub in section.subsections() {
            all_sections.push((format!("{} / {}", section.title, sub.title), sub));
        }
    }

    for (path, section) in &all_sections {
        if section.questions().is_empty() {
            out.push(warn(WarningKind::EmptySection, format!("section '{path}' has no questions")));
        }
    }

    let questions = t.questions();
    for audience in &t.audiences {
        if !questions.iter().any(|q| q.visible_to(audience)) {
            out.push(warn(WarningKind::AudienceSeesNothing, format!("audience {audience} sees no questions")));
            continue;
        }
        for (path, section) in &all_sections {
            let qs = section.questions();
            if !qs.is_empty() && !qs.iter().any(|q| q.visible_to(audience)) {
                out.push(warn(
                    WarningKind::EmptyForAudience,
                    format!("section '{path}' is empty for audience {audience}"),
                ));
            }
        }
    }

    if !questions.is_empty() && !questions.iter().any(|q| q.key) {
        out.push(warn(WarningKind::NoKeyQuestion, "no key question; the summary render will be empty".into()));
    }
    if !questions.is_empty() && !questions.iter().any(|q| q.risk) {
        out.push(warn(WarningKind::NoRiskQuestion, "no risk-tagged question".into()));
    }
    for q in &questions {
        if q.required && q.source == Source::Auto && q.hint.is_none() {
            out.push(warn(
                WarningKind::AutoWithoutHint,
                format!("required question {} is generated automatically but has no hint", q.id),
            ));
        }
    }
    out
}
