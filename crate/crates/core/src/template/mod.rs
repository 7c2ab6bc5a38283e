//! FactSheet templates: the questions a FactSheet answers, grouped into
//! sections, tagged with the producing role and the audiences that see them.
//!
//! Templates are written in a small line-oriented language (see [`parse`])
//! and always print back in a canonical form (see [`serialize`]).

mod diff;
mod lint;
mod parse;
mod serialize;
mod view;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lifecycle::{Role, Source};

pub use diff::{
    apply_diff, diff_templates, ApplyError, AttributeChange, Attributes, HeaderChange, LayoutEntry, Moved,
    PlacedQuestion, Respecd, Reworded, SectionLayout, TemplateDiff,
};
pub use lint::{lint_template, Warning, WarningKind};
pub use parse::{parse_template, Diagnostic};
pub use serialize::serialize_template;
pub use view::{derive_audience_view, ViewError};

/// Maximum section nesting: sections may hold subsections, subsections may not.
pub const MAX_DEPTH: usize = 2;

/// `[a-z][a-z0-9_]*`
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub version: u32,
    pub audiences: Vec<String>,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    /// Questions and subsections in declaration order.
    pub items: Vec<SectionItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionItem {
    Question(Question),
    Subsection(Section),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    pub answer: AnswerSpec,
    pub required: bool,
    pub role: Role,
    pub source: Source,
    /// `None` means visible to every declared audience.
    pub audiences: Option<Vec<String>>,
    pub hint: Option<String>,
    /// Included in the key-fact summary.
    pub key: bool,
    /// Relevant to harm or safety.
    pub risk: bool,
}

impl Question {
    /// A question with every attribute at its default.
    pub fn new(id: impl Into<String>, prompt: impl Into<String>) -> Self {
        Question {
            id: id.into(),
            prompt: prompt.into(),
            answer: AnswerSpec::Text,
            required: false,
            role: Role::default(),
            source: Source::Human,
            audiences: None,
            hint: None,
            key: false,
            risk: false,
        }
    }

    pub fn visible_to(&self, audience: &str) -> bool {
        match &self.audiences {
            None => true,
            Some(list) => list.iter().any(|a| a == audience),
        }
    }
}

/// The shape an answer must take.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnswerSpec {
    Text,
    Longtext,
    Number { unit: Option<String> },
    Metricset { metrics: Vec<String> },
    Enum { choices: Vec<String> },
    Uri,
    Flag,
}

impl AnswerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnswerSpec::Text => "text",
            AnswerSpec::Longtext => "longtext",
            AnswerSpec::Number { .. } => "number",
            AnswerSpec::Metricset { .. } => "metricset",
            AnswerSpec::Enum { .. } => "enum",
            AnswerSpec::Uri => "uri",
            AnswerSpec::Flag => "flag",
        }
    }
}

impl fmt::Display for AnswerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerSpec::Number { unit: Some(unit) } => write!(f, "number({unit})"),
            AnswerSpec::Metricset { metrics } => write!(f, "metricset({})", metrics.join(",")),
            AnswerSpec::Enum { choices } => write!(f, "enum({})", choices.join(",")),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// Titles of the enclosing section and, when nested, subsection.
pub type SectionPath = Vec<String>;

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Section { title: title.into(), items: Vec::new() }
    }

    /// Questions directly in this section, skipping subsections.
    pub fn own_questions(&self) -> impl Iterator<Item = &Question> {
        self.items.iter().filter_map(|item| match item {
            SectionItem::Question(q) => Some(q),
            SectionItem::Subsection(_) => None,
        })
    }

    pub fn subsections(&self) -> impl Iterator<Item = &Section> {
        self.items.iter().filter_map(|item| match item {
            SectionItem::Subsection(s) => Some(s),
            SectionItem::Question(_) => None,
        })
    }

    /// All questions in this section and its subsections, in document order.
    pub fn questions(&self) -> Vec<&Question> {
        let mut out = Vec::new();
        collect_questions(self, &mut out);
        out
    }
}

fn collect_questions<'a>(section: &'a Section, out: &mut Vec<&'a Question>) {
    for item in &section.items {
        match item {
            SectionItem::Question(q) => out.push(q),
            SectionItem::Subsection(s) => collect_questions(s, out),
        }
    }
}

impl Template {
    pub fn new(name: impl Into<String>, version: u32) -> Self {
        Template { name: name.into(), version, audiences: Vec::new(), sections: Vec::new() }
    }

    /// The name this template was derived from, without any `@audience` suffix.
    pub fn base_name(&self) -> &str {
        self.name.split('@').next().unwrap_or(&self.name)
    }

    /// `name@version`, always naming the base template.
    pub fn template_ref(&self) -> TemplateRef {
        TemplateRef { name: self.base_name().to_string(), version: self.version }
    }

    /// Every question in document order.
    pub fn questions(&self) -> Vec<&Question> {
        let mut out = Vec::new();
        for section in &self.sections {
            collect_questions(section, &mut out);
        }
        out
    }

    /// Every question paired with the path of titles that encloses it.
    pub fn questions_with_paths(&self) -> Vec<(SectionPath, &Question)> {
        let mut out = Vec::new();
        for section in &self.sections {
            for item in &section.items {
                match item {
                    SectionItem::Question(q) => out.push((vec![section.title.clone()], q)),
                    SectionItem::Subsection(sub) => {
                        for q in sub.own_questions() {
                            out.push((vec![section.title.clone(), sub.title.clone()], q));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions().into_iter().find(|q| q.id == id)
    }

    /// Checks every structural invariant. Parsed templates always pass.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if !is_clean_display(&self.name) || self.name.is_empty() {
            problems.push(format!("invalid template name {:?}", self.name));
        }
        if self.version == 0 {
            problems.push("version must be positive".to_string());
        }
        let mut declared = HashSet::new();
        for audience in &self.audiences {
            if !is_ident(audience) {
                problems.push(format!("invalid audience '{audience}'"));
            }
            if !declared.insert(audience.as_str()) {
                problems.push(format!("duplicate audience '{audience}'"));
            }
        }
        let mut ids = HashSet::new();
        for section in &self.sections {
            validate_section(section, 1, &declared, &mut ids, &mut problems);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

fn validate_section<'a>(
    section: &'a Section,
    depth: usize,
    audiences: &HashSet<&str>,
    ids: &mut HashSet<&'a str>,
    problems: &mut Vec<String>,
) {
    if depth > MAX_DEPTH {
        problems.push(format!("section '{}' exceeds nesting depth {MAX_DEPTH}", section.title));
    }
    if section.title.is_empty() || !is_clean_display(&section.title) {
        problems.push(format!("invalid section title {:?}", section.title));
    }
    for item in &section.items {
        match item {
            SectionItem::Subsection(sub) => validate_section(sub, depth + 1, audiences, ids, problems),
            SectionItem::Question(q) => {
                if !is_ident(&q.id) {
                    problems.push(format!("invalid question id '{}'", q.id));
                }
                if !ids.insert(q.id.as_str()) {
                    problems.push(format!("duplicate question id '{}'", q.id));
                }
                if q.prompt.is_empty() || !is_clean_display(&q.prompt) {
                    problems.push(format!("question '{}' has an invalid prompt", q.id));
                }
                if let Some(hint) = &q.hint {
                    if !is_clean_display(hint) {
                        problems.push(format!("question '{}' has an invalid hint", q.id));
                    }
                }
                if let Role::Other(name) = &q.role {
                    if !is_ident(name) {
                        problems.push(format!("question '{}' has an invalid role", q.id));
                    }
                }
                if let Some(list) = &q.audiences {
                    if list.is_empty() {
                        problems.push(format!("question '{}' has an empty audience list", q.id));
                    }
                    for a in list {
                        if !audiences.contains(a.as_str()) {
                            problems.push(format!("question '{}' references undeclared audience '{a}'", q.id));
                        }
                    }
                }
                if let Err(msg) = validate_spec(&q.answer) {
                    problems.push(format!("question '{}': {msg}", q.id));
                }
            }
        }
    }
}

pub(crate) fn validate_spec(spec: &AnswerSpec) -> Result<(), String> {
    match spec {
        AnswerSpec::Enum { choices } => {
            if choices.iter().any(|c| !is_ident(c)) {
                return Err("enum choices must be identifiers".into());
            }
            if distinct(choices) != choices.len() {
                return Err("enum choices must be distinct".into());
            }
            if choices.len() < 2 {
                return Err("enum needs at least 2 distinct choices".into());
            }
        }
        AnswerSpec::Metricset { metrics } => {
            if metrics.iter().any(|m| !is_ident(m)) {
                return Err("metric names must be identifiers".into());
            }
            if distinct(metrics) != metrics.len() {
                return Err("metric names must be distinct".into());
            }
            if metrics.is_empty() {
                return Err("metricset needs at least 1 metric".into());
            }
        }
        AnswerSpec::Number { unit: Some(unit) } if !is_unit(unit) => {
            return Err(format!("invalid unit '{unit}'"));
        }
        _ => {}
    }
    Ok(())
}

fn distinct(items: &[String]) -> usize {
    items.iter().collect::<HashSet<_>>().len()
}

/// A unit is any run of printable, non-space characters other than `(`, `)` and `,`.
pub(crate) fn is_unit(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| !c.is_whitespace() && !c.is_control() && !matches!(c, '(' | ')' | ',' | '"' | '#'))
}

/// Display strings live on one line.
fn is_clean_display(s: &str) -> bool {
    !s.chars().any(|c| c.is_control())
}

/// `name@version` naming a base template.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateRef {
    pub name: String,
    pub version: u32,
}

impl fmt::Display for TemplateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid template reference '{0}' (expected NAME@VERSION)")]
pub struct BadTemplateRef(pub String);

impl std::str::FromStr for TemplateRef {
    type Err = BadTemplateRef;

    /// Accepts `name@3` and `name@v3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadTemplateRef(s.to_string());
        let (name, version) = s.rsplit_once('@').ok_or_else(bad)?;
        let version = version.strip_prefix('v').unwrap_or(version);
        let version: u32 = version.parse().map_err(|_| bad())?;
        if name.is_empty() || name.contains('@') || version == 0 {
            return Err(bad());
        }
        Ok(TemplateRef { name: name.to_string(), version })
    }
}

impl Serialize for TemplateRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TemplateRef {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
