//! Structural comparison of two template revisions.
//!
//! Questions are matched by id. A renamed id shows up as one removal plus one
//! addition.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AnswerSpec, Question, Section, SectionItem, SectionPath, Template};
use crate::lifecycle::{Role, Source};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedQuestion {
    pub question: Question,
    pub path: SectionPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reworded {
    pub id: String,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Respecd {
    pub id: String,
    pub old: AnswerSpec,
    pub new: AnswerSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moved {
    pub id: String,
    pub from: SectionPath,
    pub to: SectionPath,
}

/// Question metadata other than the prompt and answer spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes {
    pub required: bool,
    pub role: Role,
    pub source: Source,
    pub audiences: Option<Vec<String>>,
    pub hint: Option<String>,
    pub key: bool,
    pub risk: bool,
}

impl Attributes {
    fn of(q: &Question) -> Self {
        Attributes {
            required: q.required,
            role: q.role.clone(),
            source: q.source,
            audiences: q.audiences.clone(),
            hint: q.hint.clone(),
            key: q.key,
            risk: q.risk,
        }
    }

    fn apply(&self, q: &mut Question) {
        q.required = self.required;
        q.role = self.role.clone();
        q.source = self.source;
        q.audiences = self.audiences.clone();
        q.hint = self.hint.clone();
        q.key = self.key;
        q.risk = self.risk;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeChange {
    pub id: String,
    pub old: Attributes,
    pub new: Attributes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderChange {
    pub name: String,
    pub version: u32,
    pub audiences: Vec<String>,
}

/// Skeleton of a section: titles and question ids in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionLayout {
    pub title: String,
    pub entries: Vec<LayoutEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutEntry {
    Question(String),
    Subsection(SectionLayout),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TemplateDiff {
    pub added: Vec<PlacedQuestion>,
    pub removed: Vec<String>,
    pub reworded: Vec<Reworded>,
    pub respecd: Vec<Respecd>,
    pub moved: Vec<Moved>,
    /// Changes to `required`, `by`, `source`, `audience`, `hint`, `key` or `risk`.
    pub retagged: Vec<AttributeChange>,
    /// Present when the name, version or audience list changed.
    pub header: Option<HeaderChange>,
    /// The new section skeleton, present whenever it differs from the old one.
    pub layout: Option<Vec<SectionLayout>>,
}

impl TemplateDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty()
            && self.removed.is_empty()
            && self.reworded.is_empty()
            && self.respecd.is_empty()
            && self.moved.is_empty()
            && self.retagged.is_empty()
            && self.header.is_none()
            && self.layout.is_none()
    }

    /// One line per change, `+`/`-`/`~` prefixed.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.header {
            out.push_str(&format!("~ header: template \"{}\" v{} audiences [{}]\n", h.name, h.version, h.audiences.join(" ")));
        }
        for a in &self.added {
            out.push_str(&format!("+ {} \"{}\" in {}\n", a.question.id, a.question.prompt, a.path.join(" / ")));
        }
        for id in &self.removed {
            out.push_str(&format!("- {id}\n"));
        }
        for r in &self.reworded {
            out.push_str(&format!("~ {} reworded: \"{}\" -> \"{}\"\n", r.id, r.old, r.new));
        }
        for r in &self.respecd {
            out.push_str(&format!("~ {} type: {} -> {}\n", r.id, r.old, r.new));
        }
        for m in &self.moved {
            out.push_str(&format!("~ {} moved: {} -> {}\n", m.id, m.from.join(" / "), m.to.join(" / ")));
        }
        for c in &self.retagged {
            out.push_str(&format!("~ {} attributes changed\n", c.id));
        }
        if self.layout.is_some() && out.is_empty() {
            out.push_str("~ sections reordered\n");
        }
        out
    }
}

fn layout_of(sections: &[Section]) -> Vec<SectionLayout> {
    sections.iter().map(section_layout).collect()
}

fn section_layout(section: &Section) -> SectionLayout {
    SectionLayout {
        title: section.title.clone(),
        entries: section
            .items
            .iter()
            .map(|item| match item {
                SectionItem::Question(q) => LayoutEntry::Question(q.id.clone()),
                SectionItem::Subsection(sub) => LayoutEntry::Subsection(section_layout(sub)),
            })
            .collect(),
    }
}

pub fn diff_templates(old: &Template, new: &Template) -> TemplateDiff {
    let old_qs: HashMap<&str, (SectionPath, &Question)> =
        old.questions_with_paths().into_iter().map(|(p, q)| (q.id.as_str(), (p, q))).collect();
    let new_paths = new.questions_with_paths();
    let new_ids: HashSet<&str> = new_paths.iter().map(|(_, q)| q.id.as_str()).collect();

    let mut diff = TemplateDiff::default();
    for q in old.questions() {
        if !new_ids.contains(q.id.as_str()) {
            diff.removed.push(q.id.clone());
        }
    }
    for (path, q) in &new_paths {
        let Some((old_path, old_q)) = old_qs.get(q.id.as_str()) else {
            diff.added.push(PlacedQuestion { question: (*q).clone(), path: path.clone() });
            continue;
        };
        if old_q.prompt != q.prompt {
            diff.reworded.push(Reworded { id: q.id.clone(), old: old_q.prompt.clone(), new: q.prompt.clone() });
        }
        if old_q.answer != q.answer {
            diff.respecd.push(Respecd { id: q.id.clone(), old: old_q.answer.clone(), new: q.answer.clone() });
        }
        if old_path != path {
            diff.moved.push(Moved { id: q.id.clone(), from: old_path.clone(), to: path.clone() });
        }
        let (before, after) = (Attributes::of(old_q), Attributes::of(q));
        if before != after {
            diff.retagged.push(AttributeChange { id: q.id.clone(), old: before, new: after });
        }
    }
    if old.name != new.name || old.version != new.version || old.audiences != new.audiences {
        diff.header = Some(HeaderChange { name: new.name.clone(), version: new.version, audiences: new.audiences.clone() });
    }
    let new_layout = layout_of(&new.sections);
    if layout_of(&old.sections) != new_layout {
        diff.layout = Some(new_layout);
    }
    diff
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("diff references question '{0}' which is not available")]
    MissingQuestion(String),
    #[error("diff removes question '{0}' which the old template does not have")]
    NotPresent(String),
}

/// Applies a diff produced by [`diff_templates`] to the old template.
pub fn apply_diff(old: &Template, diff: &TemplateDiff) -> Result<Template, ApplyError> {
    let mut pool: HashMap<String, Question> = old.questions().into_iter().map(|q| (q.id.clone(), q.clone())).collect();
    for id in &diff.removed {
        pool.remove(id).ok_or_else(|| ApplyError::NotPresent(id.clone()))?;
    }
    for r in &diff.reworded {
        pool.get_mut(&r.id).ok_or_else(|| ApplyError::MissingQuestion(r.id.clone()))?.prompt = r.new.clone();
    }
    for r in &diff.respecd {
        pool.get_mut(&r.id).ok_or_else(|| ApplyError::MissingQuestion(r.id.clone()))?.answer = r.new.clone();
    }
    for c in &diff.retagged {
        c.new.apply(pool.get_mut(&c.id).ok_or_else(|| ApplyError::MissingQuestion(c.id.clone()))?);
    }
    for a in &diff.added {
        pool.insert(a.question.id.clone(), a.question.clone());
    }

    let layout = diff.layout.clone().unwrap_or_else(|| layout_of(&old.sections));
    let sections = layout.iter().map(|l| build_section(l, &mut pool)).collect::<Result<Vec<_>, _>>()?;
    let (name, version, audiences) = match &diff.header {
        Some(h) => (h.name.clone(), h.version, h.audiences.clone()),
        None => (old.name.clone(), old.version, old.audiences.clone()),
    };
    Ok(Template { name, version, audiences, sections })
}

fn build_section(layout: &SectionLayout, pool: &mut HashMap<String, Question>) -> Result<Section, ApplyError> {
    let mut items = Vec::with_capacity(layout.entries.len());
    for entry in &layout.entries {
        items.push(match entry {
            LayoutEntry::Question(id) => {
                SectionItem::Question(pool.remove(id).ok_or_else(|| ApplyError::MissingQuestion(id.clone()))?)
            }
            LayoutEntry::Subsection(sub) => SectionItem::Subsection(build_section(sub, pool)?),
        });
    }
    Ok(Section { title: layout.title.clone(), items })
}
