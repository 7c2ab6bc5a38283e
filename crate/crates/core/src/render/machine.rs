use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{Format, RenderedDocument};
use crate::compliance::{completeness, TemplateMismatch};
use crate::factstore::{Answer, AnswerValue, FactSheet, Provenance};
use crate::template::{Question, Template, TemplateRef};

pub const SCHEMA_VERSION: u64 = 1;

// Field order in these structs is the key order of the export.

#[derive(Serialize)]
struct Document<'a> {
    factsheet_schema: u64,
    subject: Subject<'a>,
    template: TemplateId<'a>,
    as_of: String,
    sections: Vec<SectionOut<'a>>,
    completeness: Completeness,
}

#[derive(Serialize)]
struct Subject<'a> {
    id: &'a str,
    version: &'a str,
}

#[derive(Serialize)]
struct TemplateId<'a> {
    name: &'a str,
    version: u32,
}

#[derive(Serialize)]
struct SectionOut<'a> {
    title: String,
    questions: Vec<QuestionOut<'a>>,
}

#[derive(Serialize)]
struct QuestionOut<'a> {
    id: &'a str,
    prompt: &'a str,
    required: bool,
    risk: bool,
    answered: bool,
    answer: Option<&'a AnswerValue>,
    provenance: Option<&'a Provenance>,
}

#[derive(Serialize)]
struct Completeness {
    required_total: usize,
    required_answered: usize,
    orphaned_records: usize,
}

/// JSON export of every template question, answered or not.
///
/// Subsections are flattened into entries titled `Section / Subsection`,
/// placed right after their parent's entry.
pub fn export_machine(sheet: &FactSheet, template: &Template) -> Result<RenderedDocument, TemplateMismatch> {
    let report = completeness(sheet, template)?;
    let mut sections = Vec::new();
    for section in &template.sections {
        sections.push(SectionOut {
            title: section.title.clone(),
            questions: section.own_questions().map(|q| question_out(sheet, q)).collect(),
        });
        for sub in section.subsections() {
            sections.push(SectionOut {
                title: format!("{} / {}", section.title, sub.title),
                questions: sub.own_questions().map(|q| question_out(sheet, q)).collect(),
            });
        }
    }
    let template_ref = template.template_ref();
    let document = Document {
        factsheet_schema: SCHEMA_VERSION,
        subject: Subject { id: &sheet.subject_id, version: &sheet.subject_version },
        template: TemplateId { name: &template_ref.name, version: template_ref.version },
        as_of: sheet.as_of.to_string(),
        sections,
        completeness: Completeness {
            required_total: report.required_total,
            required_answered: report.required_answered,
            orphaned_records: sheet.orphaned,
        },
    };
    let mut media = serde_json::to_string_pretty(&document).expect("export is always serializable");
    media.push('\n');
    Ok(RenderedDocument { format: Format::Machine, media, generated_at: sheet.as_of })
}

fn question_out<'a>(sheet: &'a FactSheet, q: &'a Question) -> QuestionOut<'a> {
    let answer = sheet.answered(&q.id);
    QuestionOut {
        id: &q.id,
        prompt: &q.prompt,
        required: q.required,
        risk: q.risk,
        answered: answer.is_some(),
        answer: answer.map(|a| &a.value),
        provenance: answer.map(|a| &a.provenance),
    }
}

/// A schema violation, located by a path such as `sections[0].questions[2].answer.kind`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ImportError {
    pub path: String,
    pub message: String,
}

fn fail<T>(path: &str, message: impl Into<String>) -> Result<T, ImportError> {
    Err(ImportError { path: path.to_string(), message: message.into() })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ImportError> {
    v.as_object().map_or_else(|| fail(path, "expected an object"), Ok)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<(&'a Value, String), ImportError> {
    let here = if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match obj.get(key) {
        Some(v) => Ok((v, here)),
        None => fail(&here, "missing field"),
    }
}

fn string<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, ImportError> {
    let (v, here) = field(obj, key, path)?;
    v.as_str().map_or_else(|| fail(&here, "expected a string"), Ok)
}

fn boolean(obj: &Map<String, Value>, key: &str, path: &str) -> Result<bool, ImportError> {
    let (v, here) = field(obj, key, path)?;
    v.as_bool().map_or_else(|| fail(&here, "expected a boolean"), Ok)
}

fn count(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u64, ImportError> {
    let (v, here) = field(obj, key, path)?;
    v.as_u64().map_or_else(|| fail(&here, "expected a non-negative integer"), Ok)
}

fn parsed<T: std::str::FromStr>(obj: &Map<String, Value>, key: &str, path: &str) -> Result<T, ImportError>
where
    T::Err: std::fmt::Display,
{
    let raw = string(obj, key, path)?;
    raw.parse().map_err(|e: T::Err| ImportError { path: format!("{path}.{key}"), message: e.to_string() })
}

const KINDS: [&str; 7] = ["text", "longtext", "number", "metricset", "enum", "uri", "flag"];

/// Reads a document produced by [`export_machine`] back into a FactSheet.
///
/// Only answered questions become answers; the template itself is not
/// reconstructed, only its reference.
pub fn import_machine(document: &str) -> Result<FactSheet, ImportError> {
    let root: Value = serde_json::from_str(document).map_err(|e| ImportError { path: "$".into(), message: e.to_string() })?;
    let root = object(&root, "$")?;
    let schema = count(root, "factsheet_schema", "")?;
    if schema != SCHEMA_VERSION {
        return fail("factsheet_schema", format!("unsupported schema version {schema}"));
    }
    let (subject, subject_path) = field(root, "subject", "")?;
    let subject = object(subject, &subject_path)?;
    let subject_id = string(subject, "id", &subject_path)?.to_string();
    let subject_version = string(subject, "version", &subject_path)?.to_string();

    let (tmpl, tmpl_path) = field(root, "template", "")?;
    let tmpl = object(tmpl, &tmpl_path)?;
    let name = string(tmpl, "name", &tmpl_path)?.to_string();
    let version = count(tmpl, "version", &tmpl_path)?;
    let version = u32::try_from(version).ok().filter(|v| *v > 0);
    let Some(version) = version else { return fail("template.version", "expected a positive 32-bit integer") };

    let as_of = parsed(root, "as_of", "")?;

    let (sections, sections_path) = field(root, "sections", "")?;
    let Some(sections) = sections.as_array() else { return fail(&sections_path, "expected an array") };
    let mut answers = BTreeMap::new();
    for (si, section) in sections.iter().enumerate() {
        let path = format!("sections[{si}]");
        let section = object(section, &path)?;
        string(section, "title", &path)?;
        let (questions, questions_path) = field(section, "questions", &path)?;
        let Some(questions) = questions.as_array() else { return fail(&questions_path, "expected an array") };
        for (qi, question) in questions.iter().enumerate() {
            let path = format!("{path}.questions[{qi}]");
            if let Some((id, answer)) = import_question(question, &path)? {
                if answers.insert(id.clone(), answer).is_some() {
                    return fail(&format!("{path}.id"), format!("question '{id}' appears twice"));
                }
            }
        }
    }

    let (block, block_path) = field(root, "completeness", "")?;
    let block = object(block, &block_path)?;
    count(block, "required_total", &block_path)?;
    count(block, "required_answered", &block_path)?;
    let orphaned = count(block, "orphaned_records", &block_path)? as usize;

    Ok(FactSheet { subject_id, subject_version, template_ref: TemplateRef { name, version }, as_of, answers, orphaned })
}

fn import_question(v: &Value, path: &str) -> Result<Option<(String, Answer)>, ImportError> {
    let q = object(v, path)?;
    let id = string(q, "id", path)?.to_string();
    string(q, "prompt", path)?;
    boolean(q, "required", path)?;
    boolean(q, "risk", path)?;
    let answered = boolean(q, "answered", path)?;
    let (answer, answer_path) = field(q, "answer", path)?;
    let (provenance, provenance_path) = field(q, "provenance", path)?;
    if !answered {
        if !answer.is_null() {
            return fail(&answer_path, "must be null when answered is false");
        }
        if !provenance.is_null() {
            return fail(&provenance_path, "must be null when answered is false");
        }
        return Ok(None);
    }

    let answer_obj = object(answer, &answer_path)?;
    let kind = string(answer_obj, "kind", &answer_path)?;
    if !KINDS.contains(&kind) {
        return fail(&format!("{answer_path}.kind"), format!("unknown answer kind '{kind}'"));
    }
    let value: AnswerValue =
        serde_json::from_value(answer.clone()).map_err(|e| ImportError { path: answer_path.clone(), message: e.to_string() })?;

    let p = object(provenance, &provenance_path)?;
    let provenance = Provenance {
        author: string(p, "author", &provenance_path)?.to_string(),
        role: parsed(p, "role", &provenance_path)?,
        recorded_at: parsed(p, "recorded_at", &provenance_path)?,
        source: parsed(p, "source", &provenance_path)?,
        record_id: string(p, "record_id", &provenance_path)?.to_string(),
    };
    Ok(Some((id, Answer { value, provenance })))
}
