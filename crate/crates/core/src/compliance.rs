//! Completeness and lifecycle stage gates for an assembled FactSheet.

use serde::{Deserialize, Serialize};

use crate::factstore::FactSheet;
use crate::lifecycle::{Role, Stage};
use crate::template::{Template, TemplateRef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sheet was assembled for {sheet}, not {template}")]
pub struct TemplateMismatch {
    pub sheet: TemplateRef,
    pub template: TemplateRef,
}

fn check_pair(sheet: &FactSheet, template: &Template) -> Result<(), TemplateMismatch> {
    let template_ref = template.template_ref();
    if sheet.template_ref == template_ref {
        Ok(())
    } else {
        Err(TemplateMismatch { sheet: sheet.template_ref.clone(), template: template_ref })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionCompleteness {
    pub title: String,
    pub required_total: usize,
    pub required_answered: usize,
    pub optional_answered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    /// One row per top-level section; subsection questions count toward their parent.
    pub sections: Vec<SectionCompleteness>,
    pub required_total: usize,
    pub required_answered: usize,
    /// `required_answered / required_total`, or 1.0 when nothing is required.
    pub fraction: f64,
    pub missing_required: Vec<String>,
    /// Unanswered risk-tagged questions, required or not.
    pub unanswered_risk: Vec<String>,
}

pub fn completeness(sheet: &FactSheet, template: &Template) -> Result<CompletenessReport, TemplateMismatch> {
    check_pair(sheet, template)?;
    let mut sections = Vec::new();
    let mut missing_required = Vec::new();
    let mut unanswered_risk = Vec::new();
    for section in &template.sections {
        let mut row = SectionCompleteness {
            title: section.title.clone(),
            required_total: 0,
            required_answered: 0,
            optional_answered: 0,
        };
        for q in section.questions() {
            let answered = sheet.answers.contains_key(&q.id);
            match (q.required, answered) {
                (true, true) => {
                    row.required_total += 1;
                    row.required_answered += 1;
                }
                (true, false) => {
                    row.required_total += 1;
                    missing_required.push(q.id.clone());
                }
                (false, true) => row.optional_answered += 1,
                (false, false) => {}
            }
            if q.risk && !answered {
                unanswered_risk.push(q.id.clone());
            }
        }
        sections.push(row);
    }
    let required_total: usize = sections.iter().map(|s| s.required_total).sum();
    let required_answered: usize = sections.iter().map(|s| s.required_answered).sum();
    let fraction = if required_total == 0 { 1.0 } else { required_answered as f64 / required_total as f64 };
    Ok(CompletenessReport { sections, required_total, required_answered, fraction, missing_required, unanswered_risk })
}

/// An answer in the sheet that the template no longer accepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nonconforming {
    pub question_id: String,
    pub reason: String,
}

/// Re-checks every answer in `sheet` against `template`. Sheets built by
/// [`crate::factstore::assemble`] always come back clean; imported or
/// hand-built sheets might not.
pub fn verify_answers(sheet: &FactSheet, template: &Template) -> Result<Vec<Nonconforming>, TemplateMismatch> {
    check_pair(sheet, template)?;
    let mut bad = Vec::new();
    for (id, answer) in &sheet.answers {
        let reason = match template.question(id) {
            None => Some("question is not in the template".to_string()),
            Some(q) => answer.value.conforms_to(&q.answer).err().map(|e| e.to_string()),
        };
        if let Some(reason) = reason {
            bad.push(Nonconforming { question_id: id.clone(), reason });
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocker {
    pub question_id: String,
    pub role: Role,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDecision {
    pub target: Stage,
    pub pass: bool,
    /// Unanswered required questions owed at or before `target`.
    pub blocking: Vec<Blocker>,
    /// Unanswered risk-tagged questions; informational, they never block on their own.
    pub unanswered_risk: Vec<String>,
}

/// Whether a subject may advance to `target`: every required question whose
/// producing role maps to a stage at or before `target` must be answered.
pub fn check_stage_gate(sheet: &FactSheet, template: &Template, target: Stage) -> Result<GateDecision, TemplateMismatch> {
    check_pair(sheet, template)?;
    let mut blocking = Vec::new();
    let mut unanswered_risk = Vec::new();
    for q in template.questions() {
        let answered = sheet.answers.contains_key(&q.id);
        if q.required && !answered && q.role.stage() <= target {
            blocking.push(Blocker { question_id: q.id.clone(), role: q.role.clone(), stage: q.role.stage() });
        }
        if q.risk && !answered {
            unanswered_risk.push(q.id.clone());
        }
    }
    Ok(GateDecision { target, pass: blocking.is_empty(), blocking, unanswered_risk })
}
