use std::fmt::Write;

use super::{inline_answer, metric_lines, one_line, scalar, Format, RenderedDocument};
use crate::compliance::{completeness, TemplateMismatch};
use crate::factstore::{AnswerValue, FactSheet, Provenance};
use crate::template::{Question, Section, SectionItem, Template};

/// Longest answer, in characters, shown on a slide bullet.
pub const SLIDE_ANSWER_LIMIT: usize = 120;

/// Longest answer, in characters, shown in the summary table.
pub const SUMMARY_ANSWER_LIMIT: usize = 60;

const UNANSWERED: &str = "—";

fn titled(template: &Template) -> String {
    format!("{} v{}", template.name, template.version)
}

fn doc(format: Format, sheet: &FactSheet, media: String) -> RenderedDocument {
    RenderedDocument { format, media, generated_at: sheet.as_of }
}

fn provenance_line(p: &Provenance) -> String {
    format!("recorded by {} ({}) at {} [{}]", p.role, p.author, p.recorded_at, p.source)
}

fn width(s: &str) -> usize {
    s.chars().count()
}

fn pad(s: &str, to: usize) -> String {
    let mut out = s.to_string();
    out.extend(std::iter::repeat_n(' ', to.saturating_sub(width(s))));
    out
}

/// Key questions only, as a two-column table.
pub fn render_summary(sheet: &FactSheet, template: &Template) -> Result<RenderedDocument, TemplateMismatch> {
    let report = completeness(sheet, template)?;
    let rows: Vec<(String, String)> = template
        .questions()
        .into_iter()
        .filter(|q| q.key)
        .map(|q| {
            let answer = sheet.answered(&q.id).map(|a| ellipsize(&inline_answer(&a.value, &q.answer), SUMMARY_ANSWER_LIMIT));
            (one_line(&q.prompt), answer.unwrap_or_else(|| UNANSWERED.to_string()))
        })
        .collect();
    let left = rows.iter().map(|(p, _)| width(p)).chain([width("Question")]).max().unwrap_or(0);
    let right = rows.iter().map(|(_, a)| width(a)).chain([width("Answer")]).max().unwrap_or(0);

    let mut out = String::new();
    writeln!(out, "Key facts: {} {}", sheet.subject_id, sheet.subject_version).unwrap();
    writeln!(out, "Template: {}", titled(template)).unwrap();
    writeln!(out, "As of: {}", sheet.as_of).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "{} | Answer", pad("Question", left)).unwrap();
    writeln!(out, "{}-+-{}", "-".repeat(left), "-".repeat(right)).unwrap();
    for (prompt, answer) in &rows {
        writeln!(out, "{} | {answer}", pad(prompt, left)).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "completeness {}/{}", report.required_answered, report.required_total).unwrap();
    Ok(doc(Format::Summary, sheet, out))
}

/// Every question with its answer and provenance, section by section.
pub fn render_report(sheet: &FactSheet, template: &Template) -> Result<RenderedDocument, TemplateMismatch> {
    let report = completeness(sheet, template)?;
    let mut out = String::new();
    writeln!(out, "# {}", titled(template)).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Subject: {} {}", sheet.subject_id, sheet.subject_version).unwrap();
    writeln!(out, "As of: {}", sheet.as_of).unwrap();
    writeln!(out, "Completeness: {}/{} required answered", report.required_answered, report.required_total).unwrap();
    if !report.unanswered_risk.is_empty() {
        writeln!(out, "Unanswered risk questions: {}", report.unanswered_risk.join(", ")).unwrap();
    }
    if sheet.orphaned > 0 {
        writeln!(out, "Orphaned records: {}", sheet.orphaned).unwrap();
    }
    for section in &template.sections {
        report_section(&mut out, sheet, section, 2);
    }
    Ok(doc(Format::Report, sheet, out))
}

fn report_section(out: &mut String, sheet: &FactSheet, section: &Section, depth: usize) {
    writeln!(out).unwrap();
    writeln!(out, "{} {}", "#".repeat(depth), section.title).unwrap();
    for item in &section.items {
        match item {
            SectionItem::Question(q) => report_question(out, sheet, q),
            SectionItem::Subsection(sub) => report_section(out, sheet, sub, depth + 1),
        }
    }
}

fn report_question(out: &mut String, sheet: &FactSheet, q: &Question) {
    writeln!(out).unwrap();
    let risk = if q.risk { "RISK: " } else { "" };
    writeln!(out, "[{}] {risk}{}", q.id, q.prompt).unwrap();
    match sheet.answered(&q.id) {
        None if q.required => writeln!(out, "  MISSING (required)").unwrap(),
        None => writeln!(out, "  (unanswered)").unwrap(),
        Some(answer) => {
            match &answer.value {
                AnswerValue::Metricset { .. } => {
                    for (name, value) in metric_lines(&answer.value, &q.answer) {
                        writeln!(out, "  {name}: {value}").unwrap();
                    }
                }
                other => {
                    for line in scalar(other, &q.answer).lines() {
                        writeln!(out, "  {line}").unwrap();
                    }
                }
            }
            writeln!(out, "  {}", provenance_line(&answer.provenance)).unwrap();
        }
    }
}

/// A title slide followed by one slide per top-level section.
pub fn render_slides(sheet: &FactSheet, template: &Template) -> Result<RenderedDocument, TemplateMismatch> {
    let report = completeness(sheet, template)?;
    let mut out = String::new();
    writeln!(out, "= {} {}", sheet.subject_id, sheet.subject_version).unwrap();
    writeln!(out, "{}", titled(template)).unwrap();
    writeln!(out, "As of {}", sheet.as_of).unwrap();
    writeln!(out, "Completeness {}/{}", report.required_answered, report.required_total).unwrap();
    for section in &template.sections {
        writeln!(out).unwrap();
        writeln!(out, "= {}", section.title).unwrap();
        for item in &section.items {
            match item {
                SectionItem::Question(q) => writeln!(out, "- {}", bullet(sheet, q)).unwrap(),
                SectionItem::Subsection(sub) => {
                    writeln!(out, "- {}", sub.title).unwrap();
                    for q in sub.own_questions() {
                        writeln!(out, "  - {}", bullet(sheet, q)).unwrap();
                    }
                }
            }
        }
    }
    Ok(doc(Format::Slides, sheet, out))
}

fn bullet(sheet: &FactSheet, q: &Question) -> String {
    let answer = match sheet.answered(&q.id) {
        Some(a) => ellipsize(&inline_answer(&a.value, &q.answer), SLIDE_ANSWER_LIMIT),
        None => UNANSWERED.to_string(),
    };
    let risk = if q.risk { "RISK: " } else { "" };
    format!("{risk}{}: {answer}", one_line(&q.prompt))
}

fn ellipsize(s: &str, limit: usize) -> String {
    if width(s) <= limit {
        return s.to_string();
    }
    let mut out: String = s.chars().take(limit - 1).collect();
    out.push('…');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factstore::Answer;
    use crate::fixtures;
    use crate::lifecycle::{Role, Source};
    use crate::template::parse_template;
    use crate::time::Timestamp;

    fn empty(t: &Template) -> FactSheet {
        FactSheet {
            subject_id: "m".into(),
            subject_version: "1".into(),
            template_ref: t.template_ref(),
            as_of: "2024-05-01T12:00:00Z".parse().unwrap(),
            answers: Default::default(),
            orphaned: 0,
        }
    }

    fn answer(value: AnswerValue) -> Answer {
        Answer {
            value,
            provenance: Provenance {
                author: "ana".into(),
                role: Role::BusinessOwner,
                recorded_at: Timestamp::epoch(),
                source: Source::Human,
                record_id: "r1-00".into(),
            },
        }
    }

    #[test]
    fn summary_of_two_answered_key_questions() {
        let t = parse_template(
            "template \"t\" v1\nsection \"S\"\n  question q1 \"Purpose?\" key required\n  question q2 \"Domain?\" key\n  question q3 \"Other?\"\nend\n",
        )
        .unwrap();
        let mut s = empty(&t);
        s.answers.insert("q1".into(), answer(AnswerValue::text("Detect objects")));
        s.answers.insert("q2".into(), answer(AnswerValue::text("Retail")));
        let media = render_summary(&s, &t).unwrap().media;
        let body: Vec<&str> = media.lines().skip_while(|l| !l.starts_with("---")).skip(1).take_while(|l| !l.is_empty()).collect();
        assert_eq!(body, ["Purpose? | Detect objects", "Domain?  | Retail"]);
        assert!(media.ends_with("\ncompleteness 1/1\n"));
    }

    #[test]
    fn summary_without_key_questions_keeps_header_and_footer() {
        let t = parse_template("template \"t\" v1\nsection \"S\"\n  question q1 \"A?\" required\nend\n").unwrap();
        let media = render_summary(&empty(&t), &t).unwrap().media;
        assert!(media.contains("Question | Answer\n---------+-------\n\ncompleteness 0/1\n"), "{media}");
    }

    #[test]
    fn unanswered_key_question_shows_a_dash() {
        let t = fixtures::max_catalog();
        let media = render_summary(&empty(&t), &t).unwrap().media;
        assert!(media.lines().any(|l| l.starts_with("What is this model for?") && l.ends_with("| —")));
        assert!(media.ends_with("completeness 0/10\n"));
    }

    #[test]
    fn report_marks_missing_and_risk() {
        let t = fixtures::max_catalog();
        let media = render_report(&empty(&t), &t).unwrap().media;
        assert_eq!(media.matches("MISSING (required)").count(), 10);
        assert!(media.contains("[q6] RISK: What are the model's performance metrics?\n  MISSING (required)"));
        assert!(media.starts_with("# max_catalog v1\n"));
        assert_eq!(media.matches("\n## ").count(), 4);
    }

    #[test]
    fn report_prints_metrics_in_declaration_order() {
        let t = fixtures::max_catalog();
        let mut s = empty(&t);
        let values = [("bias".to_string(), 0.02), ("accuracy".to_string(), 0.91)].into();
        let mut a = answer(AnswerValue::Metricset { values });
        a.provenance.source = Source::Auto;
        a.provenance.role = Role::ModelValidator;
        a.provenance.author = "pipeline".into();
        s.answers.insert("q6".into(), a);
        let media = render_report(&s, &t).unwrap().media;
        assert!(media.contains(
            "  accuracy: 0.91\n  bias: 0.02\n  recorded by model_validator (pipeline) at 1970-01-01T00:00:00Z [auto]\n"
        ));
    }

    #[test]
    fn slides_count_and_truncate() {
        let t = parse_template(
            "template \"t\" v1\nsection \"A\"\n  question q1 \"Long?\" type:longtext\nend\nsection \"B\"\nend\nsection \"C\"\n  subsection \"D\"\n    question q2 \"Deep?\"\n  end\nend\n",
        )
        .unwrap();
        let mut s = empty(&t);
        s.answers.insert("q1".into(), answer(AnswerValue::longtext("x".repeat(500))));
        let media = render_slides(&s, &t).unwrap().media;
        assert_eq!(media.lines().filter(|l| l.starts_with("= ")).count(), 4);
        let long = media.lines().find(|l| l.starts_with("- Long?: ")).unwrap();
        let shown = long.strip_prefix("- Long?: ").unwrap();
        assert_eq!(shown.chars().count(), SLIDE_ANSWER_LIMIT);
        assert!(shown.ends_with('…'));
        assert!(media.contains("  - Deep?: —\n"));
    }

    #[test]
    fn short_answers_are_not_ellipsized() {
        assert_eq!(ellipsize("abc", 3), "abc");
        assert_eq!(ellipsize("abcd", 3), "ab…");
    }
}
