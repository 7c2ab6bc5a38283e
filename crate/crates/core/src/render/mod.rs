//! Deterministic renderings of a FactSheet: key-fact summary, full report,
//! slide outline, and a machine-readable JSON export (with its inverse).
//!
//! Every renderer is a pure function of `(sheet, template)`. The
//! `generated_at` stamp is the sheet's `as_of`, never the wall clock.

mod machine;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use machine::{export_machine, import_machine, ImportError, SCHEMA_VERSION};
pub use text::{render_report, render_slides, render_summary, SLIDE_ANSWER_LIMIT, SUMMARY_ANSWER_LIMIT};

use crate::compliance::TemplateMismatch;
use crate::factstore::{AnswerValue, FactSheet};
use crate::template::{AnswerSpec, Template};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Summary,
    Report,
    Slides,
    Machine,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Summary, Format::Report, Format::Slides, Format::Machine];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Summary => "summary",
            Format::Report => "report",
            Format::Slides => "slides",
            Format::Machine => "machine",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Format::Machine => "application/json",
            _ => "text/plain; charset=utf-8",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown format '{0}' (expected summary, report, slides or machine)")]
pub struct BadFormat(pub String);

impl FromStr for Format {
    type Err = BadFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| BadFormat(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedDocument {
    pub format: Format,
    pub media: String,
    pub generated_at: Timestamp,
}

pub fn render(sheet: &FactSheet, template: &Template, format: Format) -> Result<RenderedDocument, TemplateMismatch> {
    match format {
        Format::Summary => render_summary(sheet, template),
        Format::Report => render_report(sheet, template),
        Format::Slides => render_slides(sheet, template),
        Format::Machine => export_machine(sheet, template),
    }
}

/// Up to 6 significant digits with trailing zeros trimmed, switching to
/// exponent notation outside `[1e-4, 1e6)`; the same output as C's `%g`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // `{:.5e}` rounds to six significant digits and tells us the exponent after rounding.
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Single-line form of an answer. Metrics follow the question's declaration order.
pub(crate) fn inline_answer(value: &AnswerValue, spec: &AnswerSpec) -> String {
    match value {
        AnswerValue::Metricset { .. } => {
            metric_lines(value, spec).into_iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join(", ")
        }
        AnswerValue::Text { value } | AnswerValue::Longtext { value } => one_line(value),
        other => scalar(other, spec),
    }
}

pub(crate) fn scalar(value: &AnswerValue, spec: &AnswerSpec) -> String {
    match value {
        AnswerValue::Text { value } | AnswerValue::Longtext { value } => value.clone(),
        AnswerValue::Enum { value } | AnswerValue::Uri { value } => value.clone(),
        AnswerValue::Flag { value } => if *value { "yes" } else { "no" }.to_string(),
        AnswerValue::Number { value, unit } => {
            let declared = match spec {
                AnswerSpec::Number { unit } => unit.as_deref(),
                _ => None,
            };
            match unit.as_deref().or(declared) {
                Some(u) => format!("{} {u}", format_number(*value)),
                None => format_number(*value),
            }
        }
        AnswerValue::Metricset { .. } => inline_answer(value, spec),
    }
}

pub(crate) fn metric_lines(value: &AnswerValue, spec: &AnswerSpec) -> Vec<(String, String)> {
    let AnswerValue::Metricset { values } = value else { return Vec::new() };
    let declared: &[String] = match spec {
        AnswerSpec::Metricset { metrics } => metrics,
        _ => &[],
    };
    let mut out: Vec<(String, String)> = declared
        .iter()
        .filter_map(|m| values.get(m).map(|v| (m.clone(), format_number(*v))))
        .collect();
    for (m, v) in values {
        if !declared.contains(m) {
            out.push((m.clone(), format_number(*v)));
        }
    }
    out
}

pub(crate) fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
