//! Parser for the template language.
//!
//! ```text
//! template "max_catalog" v1
//! audiences developer regulator
//! section "Purpose"
//!   question q1 "What is this model for?" required by:business_owner key
//! end
//! ```
//!
//! The language is line oriented: every declaration sits on its own line,
//! `#` starts a comment and blank lines are ignored. Errors are collected per
//! line so one pass reports as many problems as possible.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_ident, is_unit, validate_spec, AnswerSpec, Question, Section, SectionItem, Template};
use crate::lifecycle::{Role, Source};

/// A problem in a template document, positioned at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for Diagnostic {}

type Step<T> = Result<T, Diagnostic>;

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error_at(&self, column: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic { line: self.line, column, message: message.into() }
    }

    fn error(&self, message: impl Into<String>) -> Diagnostic {
        self.error_at(self.column(), message)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t') {
            self.pos += 1;
        }
        self.pos > start
    }

    /// True when only whitespace or a comment remains.
    fn at_end(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some('#'))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Step<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    /// A run of `[A-Za-z0-9_]`, returned with its starting column.
    fn word(&mut self) -> Option<(String, usize)> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some((self.chars[start..self.pos].iter().collect(), start + 1))
        }
    }

    fn ident(&mut self, what: &str) -> Step<(String, usize)> {
        let column = self.column();
        match self.word() {
            Some((w, col)) if is_ident(&w) => Ok((w, col)),
            Some((w, col)) => Err(self.error_at(col, format!("invalid {what} '{w}' (expected [a-z][a-z0-9_]*)"))),
            None => Err(self.error_at(column, format!("expected {what}"))),
        }
    }

    fn string(&mut self, what: &str) -> Step<(String, usize)> {
        let column = self.column();
        if !self.eat('"') {
            return Err(self.error(format!("expected quoted {what}")));
        }
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error_at(column, "unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok((out, column));
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ ('\\' | '"')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        _ => return Err(self.error("invalid escape (only \\\\ and \\\" are allowed)")),
                    }
                }
                Some(c) if c.is_control() => return Err(self.error("control character in string")),
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    /// Comma-separated identifiers; stops before the first token that is not a comma.
    fn ident_list(&mut self, what: &str) -> Step<Vec<(String, usize)>> {
        let mut items = vec![self.ident(what)?];
        loop {
            let save = self.pos;
            self.skip_ws();
            if self.eat(',') {
                self.skip_ws();
                items.push(self.ident(what)?);
            } else {
                self.pos = save;
                return Ok(items);
            }
        }
    }

    fn finish(&mut self) -> Step<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

struct Pending {
    section: Section,
    line: usize,
    column: usize,
    sub: Option<(Section, usize, usize)>,
}

struct AudienceUse {
    line: usize,
    column: usize,
    name: String,
    question: String,
}

#[derive(Default)]
struct Builder {
    header: Option<(String, u32)>,
    audiences: Vec<String>,
    audience_set: HashSet<String>,
    sections: Vec<Section>,
    open: Option<Pending>,
    ids: HashMap<String, usize>,
    uses: Vec<AudienceUse>,
    diagnostics: Vec<Diagnostic>,
}

/// Parses a template document. On failure every diagnostic found is returned,
/// sorted by position.
pub fn parse_template(text: &str) -> Result<Template, Vec<Diagnostic>> {
    let mut b = Builder::default();
    let mut saw_header_line = false;
    for (index, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let mut cur = Cursor::new(raw, index + 1);
        if cur.at_end() {
            continue;
        }
        let first = !saw_header_line;
        saw_header_line = true;
        if let Err(d) = b.line(&mut cur, first) {
            b.diagnostics.push(d);
        }
    }
    b.finish()
}

impl Builder {
    fn line(&mut self, cur: &mut Cursor, first: bool) -> Step<()> {
        let column = cur.column();
        let Some((keyword, _)) = cur.word() else {
            return Err(cur.error("expected a declaration"));
        };
        if first && keyword != "template" {
            self.header = Some((String::new(), 1));
            return Err(cur.error_at(column, "expected 'template' header"));
        }
        match keyword.as_str() {
            "template" => self.header_line(cur, column),
            "audiences" => self.audiences_line(cur, column),
            "section" => self.section_line(cur, column),
            "subsection" => self.subsection_line(cur, column),
            "question" => self.question_line(cur, column),
            "end" => self.end_line(cur, column),
            other => Err(cur.error_at(column, format!("unknown declaration '{other}'"))),
        }
    }

    fn header_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        if self.header.is_some() {
            return Err(cur.error_at(column, "duplicate 'template' header"));
        }
        // Placeholder so later lines are not reported as missing a header.
        self.header = Some((String::new(), 1));
        cur.skip_ws();
        let (name, name_col) = cur.string("template name")?;
        if name.is_empty() {
            return Err(cur.error_at(name_col, "template name must not be empty"));
        }
        cur.skip_ws();
        let version_col = cur.column();
        let version_text = match cur.word() {
            Some((w, _)) if w == "v" => {
                cur.skip_ws();
                cur.word().map(|(w, _)| w).unwrap_or_default()
            }
            Some((w, _)) if w.starts_with('v') => w[1..].to_string(),
            _ => return Err(cur.error_at(version_col, "expected version 'vN'")),
        };
        let version = match version_text.parse::<u32>() {
            Ok(v) if v > 0 && version_text.chars().all(|c| c.is_ascii_digit()) => v,
            _ => return Err(cur.error_at(version_col, "version must be a positive integer")),
        };
        cur.finish()?;
        self.header = Some((name, version));
        Ok(())
    }

    fn audiences_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        if self.open.is_some() {
            return Err(cur.error_at(column, "'audiences' must appear outside sections"));
        }
        let mut any = false;
        while !cur.at_end() {
            if any && cur.column() > 1 && !matches!(cur.chars.get(cur.pos - 1), Some(' ' | '\t')) {
                return Err(cur.error("expected whitespace between audiences"));
            }
            let (name, col) = cur.ident("audience")?;
            if !self.audience_set.insert(name.clone()) {
                return Err(cur.error_at(col, format!("duplicate audience '{name}'")));
            }
            self.audiences.push(name);
            any = true;
        }
        if !any {
            return Err(cur.error("expected at least one audience"));
        }
        Ok(())
    }

    fn section_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        if let Some(open) = &self.open {
            return Err(cur.error_at(
                column,
                format!("'section' inside section '{}' (missing 'end'? use 'subsection' to nest)", open.section.title),
            ));
        }
        cur.skip_ws();
        let (title, title_col) = cur.string("section title")?;
        cur.finish()?;
        if title.is_empty() {
            return Err(cur.error_at(title_col, "section title must not be empty"));
        }
        self.open = Some(Pending { section: Section::new(title), line: cur.line, column, sub: None });
        Ok(())
    }

    fn subsection_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        let line = cur.line;
        let Some(open) = self.open.as_mut() else {
            return Err(cur.error_at(column, "'subsection' outside of a section"));
        };
        if open.sub.is_some() {
            return Err(cur.error_at(column, "nesting depth exceeds 2 (subsections cannot contain subsections)"));
        }
        cur.skip_ws();
        let (title, title_col) = cur.string("subsection title")?;
        cur.finish()?;
        if title.is_empty() {
            return Err(cur.error_at(title_col, "subsection title must not be empty"));
        }
        open.sub = Some((Section::new(title), line, column));
        Ok(())
    }

    fn end_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        cur.finish()?;
        let Some(open) = self.open.as_mut() else {
            return Err(cur.error_at(column, "'end' without an open section"));
        };
        if let Some((sub, _, _)) = open.sub.take() {
            open.section.items.push(SectionItem::Subsection(sub));
        } else if let Some(open) = self.open.take() {
            self.sections.push(open.section);
        }
        Ok(())
    }

    fn question_line(&mut self, cur: &mut Cursor, column: usize) -> Step<()> {
        if self.open.is_none() {
            return Err(cur.error_at(column, "'question' outside of a section"));
        }
        cur.skip_ws();
        let (id, id_col) = cur.ident("question id")?;
        if !cur.skip_ws() {
            return Err(cur.error("expected whitespace before prompt"));
        }
        let (prompt, prompt_col) = cur.string("prompt")?;
        if prompt.is_empty() {
            return Err(cur.error_at(prompt_col, "prompt must not be empty"));
        }
        let mut question = Question::new(id.clone(), prompt);
        let mut uses = Vec::new();
        let mut seen: HashSet<&'static str> = HashSet::new();
        loop {
            let had_ws = cur.skip_ws();
            if cur.at_end() {
                break;
            }
            if !had_ws {
                return Err(cur.error("expected whitespace between attributes"));
            }
            let attr_col = cur.column();
            let Some((word, _)) = cur.word() else {
                return Err(cur.error("expected an attribute"));
            };
            let slot: &'static str = match word.as_str() {
                "type" => "type",
                "required" | "optional" => "required/optional",
                "by" => "by",
                "source" => "source",
                "audience" => "audience",
                "hint" => "hint",
                "key" => "key",
                "risk" => "risk",
                other => return Err(cur.error_at(attr_col, format!("unknown attribute '{other}'"))),
            };
            if !seen.insert(slot) {
                return Err(cur.error_at(attr_col, format!("duplicate attribute '{slot}'")));
            }
            match word.as_str() {
                "required" => question.required = true,
                "optional" => question.required = false,
                "key" => question.key = true,
                "risk" => question.risk = true,
                _ => {
                    cur.expect(':')?;
                    cur.skip_ws();
                    match word.as_str() {
                        "type" => question.answer = answer_spec(cur)?,
                        "by" => question.role = role(cur)?,
                        "source" => {
                            let col = cur.column();
                            question.source = match cur.word() {
                                Some((w, _)) if w == "human" => Source::Human,
                                Some((w, _)) if w == "auto" => Source::Auto,
                                _ => return Err(cur.error_at(col, "expected 'human' or 'auto'")),
                            }
                        }
                        "audience" => {
                            let list = cur.ident_list("audience")?;
                            let mut names = Vec::new();
                            for (name, col) in list {
                                if names.contains(&name) {
                                    return Err(cur.error_at(col, format!("audience '{name}' listed twice")));
                                }
                                uses.push(AudienceUse { line: cur.line, column: col, name: name.clone(), question: id.clone() });
                                names.push(name);
                            }
                            question.audiences = Some(names);
                        }
                        "hint" => question.hint = Some(cur.string("hint")?.0),
                        _ => unreachable!(),
                    }
                }
            }
        }
        if let Some(&first_line) = self.ids.get(&id) {
            return Err(cur.error_at(id_col, format!("duplicate question id '{id}' (first declared on line {first_line})")));
        }
        self.ids.insert(id, cur.line);
        self.uses.extend(uses);
        let open = self.open.as_mut().expect("checked above");
        match open.sub.as_mut() {
            Some((sub, _, _)) => sub.items.push(SectionItem::Question(question)),
            None => open.section.items.push(SectionItem::Question(question)),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Template, Vec<Diagnostic>> {
        if let Some(open) = self.open.take() {
            if let Some((sub, line, column)) = &open.sub {
                self.diagnostics.push(Diagnostic {
                    line: *line,
                    column: *column,
                    message: format!("unterminated subsection '{}' (missing 'end')", sub.title),
                });
            }
            self.diagnostics.push(Diagnostic {
                line: open.line,
                column: open.column,
                message: format!("unterminated section '{}' (missing 'end')", open.section.title),
            });
        }
        for u in &self.uses {
            if !self.audience_set.contains(&u.name) {
                self.diagnostics.push(Diagnostic {
                    line: u.line,
                    column: u.column,
                    message: format!("question '{}' references undeclared audience '{}'", u.question, u.name),
                });
            }
        }
        let header = match self.header {
            Some(h) => h,
            None => {
                self.diagnostics.push(Diagnostic { line: 1, column: 1, message: "expected 'template' header".into() });
                (String::new(), 1)
            }
        };
        if !self.diagnostics.is_empty() {
            self.diagnostics.sort_by_key(|d| (d.line, d.column));
            return Err(self.diagnostics);
        }
        Ok(Template { name: header.0, version: header.1, audiences: self.audiences, sections: self.sections })
    }
}

fn answer_spec(cur: &mut Cursor) -> Step<AnswerSpec> {
    let column = cur.column();
    let Some((kind, _)) = cur.word() else {
        return Err(cur.error("expected an answer type"));
    };
    let spec = match kind.as_str() {
        "text" => AnswerSpec::Text,
        "longtext" => AnswerSpec::Longtext,
        "uri" => AnswerSpec::Uri,
        "flag" => AnswerSpec::Flag,
        "number" => {
            if cur.eat('(') {
                cur.skip_ws();
                let start = cur.pos;
                while matches!(cur.peek(), Some(c) if c != ')' && !c.is_whitespace()) {
                    cur.pos += 1;
                }
                let unit: String = cur.chars[start..cur.pos].iter().collect();
                if !is_unit(&unit) {
                    return Err(cur.error_at(start + 1, "invalid unit"));
                }
                cur.skip_ws();
                cur.expect(')')?;
                AnswerSpec::Number { unit: Some(unit) }
            } else {
                AnswerSpec::Number { unit: None }
            }
        }
        "metricset" | "enum" => {
            cur.expect('(')?;
            cur.skip_ws();
            let what = if kind == "enum" { "choice" } else { "metric name" };
            let names: Vec<String> = cur.ident_list(what)?.into_iter().map(|(n, _)| n).collect();
            cur.skip_ws();
            cur.expect(')')?;
            if kind == "enum" {
                AnswerSpec::Enum { choices: names }
            } else {
                AnswerSpec::Metricset { metrics: names }
            }
        }
        other => return Err(cur.error_at(column, format!("unknown answer type '{other}'"))),
    };
    validate_spec(&spec).map_err(|msg| cur.error_at(column, msg))?;
    Ok(spec)
}

fn role(cur: &mut Cursor) -> Step<Role> {
    let column = cur.column();
    let Some((word, _)) = cur.word() else {
        return Err(cur.error("expected a role"));
    };
    let role = match word.as_str() {
        "business_owner" => Role::BusinessOwner,
        "data_scientist" => Role::DataScientist,
        "model_validator" => Role::ModelValidator,
        "ai_operations" => Role::AiOperations,
        "other" => {
            cur.expect(':')?;
            let (name, _) = cur.ident("role name")?;
            Role::Other(name)
        }
        other => return Err(cur.error_at(column, format!("unknown role '{other}'"))),
    };
    Ok(role)
}
