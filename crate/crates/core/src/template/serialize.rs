use std::fmt::Write;

use super::{AnswerSpec, Question, Section, SectionItem, Template};
use crate::lifecycle::{Role, Source};

/// Prints a template in canonical form.
///
/// Declarations keep their original order. Question attributes are printed in
/// the fixed order `type`, `required`, `by`, `source`, `audience`, `hint`,
/// `key`, `risk`, and attributes at their default value are omitted.
pub fn serialize_template(t: &Template) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "template {} v{}", quote(&t.name), t.version);
    if !t.audiences.is_empty() {
        let _ = writeln!(out, "audiences {}", t.audiences.join(" "));
    }
    for section in &t.sections {
        write_section(&mut out, "section", section, 0);
    }
    out
}

fn write_section(out: &mut String, keyword: &str, section: &Section, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}{keyword} {}", quote(&section.title));
    for item in &section.items {
        match item {
            SectionItem::Question(q) => write_question(out, q, depth + 1),
            SectionItem::Subsection(sub) => write_section(out, "subsection", sub, depth + 1),
        }
    }
    let _ = writeln!(out, "{pad}end");
}

fn write_question(out: &mut String, q: &Question, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = write!(out, "{pad}question {} {}", q.id, quote(&q.prompt));
    if q.answer != AnswerSpec::Text {
        let _ = write!(out, " type:{}", q.answer);
    }
    if q.required {
        out.push_str(" required");
    }
    if q.role != Role::default() {
        let _ = write!(out, " by:{}", q.role);
    }
    if q.source != Source::Human {
        let _ = write!(out, " source:{}", q.source);
    }
    if let Some(audiences) = &q.audiences {
        let _ = write!(out, " audience:{}", audiences.join(","));
    }
    if let Some(hint) = &q.hint {
        let _ = write!(out, " hint:{}", quote(hint));
    }
    if q.key {
        out.push_str(" key");
    }
    if q.risk {
        out.push_str(" risk");
    }
    out.push('\n');
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
