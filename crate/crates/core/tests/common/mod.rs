//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use fsforge::factstore::{Answer, AnswerValue, FactRecord, FactSheet, Provenance};
use fsforge::lifecycle::{Role, Source, Stage};
use fsforge::template::{AnswerSpec, Question, Section, SectionItem, Template, TemplateRef};
use fsforge::time::Timestamp;
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::sample::subsequence;

pub const AUDIENCES: [&str; 3] = ["dev", "reg", "board"];

pub fn display() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 \"\\\\#:_().,?'é—-]{1,24}"
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn idents(min: usize) -> impl Strategy<Value = Vec<String>> {
    btree_set(ident(), min..min + 3).prop_map(|s| s.into_iter().collect())
}

pub fn spec() -> impl Strategy<Value = AnswerSpec> {
    prop_oneof![
        Just(AnswerSpec::Text),
        Just(AnswerSpec::Longtext),
        proptest::option::of("[a-zA-Z%/]{1,4}").prop_map(|unit| AnswerSpec::Number { unit }),
        idents(1).prop_map(|metrics| AnswerSpec::Metricset { metrics }),
        idents(2).prop_map(|choices| AnswerSpec::Enum { choices }),
        Just(AnswerSpec::Uri),
        Just(AnswerSpec::Flag),
    ]
}

pub fn role() -> impl Strategy<Value = Role> {
    prop_oneof![
        Just(Role::BusinessOwner),
        Just(Role::DataScientist),
        Just(Role::ModelValidator),
        Just(Role::AiOperations),
        ident().prop_map(Role::Other),
    ]
}

fn question() -> impl Strategy<Value = Question> {
    (
        display(),
        spec(),
        any::<bool>(),
        role(),
        any::<bool>(),
        proptest::option::of(subsequence(AUDIENCES.to_vec(), 1..=3)),
        proptest::option::of(display()),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(prompt, answer, required, role, auto, audiences, hint, key, risk)| Question {
            // Ids are assigned once the whole template exists.
            id: String::new(),
            prompt,
            answer,
            required,
            role,
            source: if auto { Source::Auto } else { Source::Human },
            audiences: audiences.map(|a| a.into_iter().map(String::from).collect()),
            hint,
            key,
            risk,
        })
}

fn leaf_section() -> impl Strategy<Value = Section> {
    (display(), vec(question(), 0..4)).prop_map(|(title, qs)| Section {
        title,
        items: qs.into_iter().map(SectionItem::Question).collect(),
    })
}

fn section() -> impl Strategy<Value = Section> {
    let item = prop_oneof![3 => question().prop_map(SectionItem::Question), 1 => leaf_section().prop_map(SectionItem::Subsection)];
    (display(), vec(item, 0..5)).prop_map(|(title, items)| Section { title, items })
}

fn renumber(section: &mut Section, next: &mut usize, declared: &[String]) {
    for item in &mut section.items {
        match item {
            SectionItem::Question(q) => {
                *next += 1;
                q.id = format!("q{next}");
                if let Some(list) = &mut q.audiences {
                    list.retain(|a| declared.contains(a));
                    if list.is_empty() {
                        q.audiences = None;
                    }
                }
            }
            SectionItem::Subsection(sub) => renumber(sub, next, declared),
        }
    }
}

/// Valid templates of up to a few dozen questions, exercising every attribute.
pub fn template() -> impl Strategy<Value = Template> {
    ("[a-z][a-z0-9_]{0,8}", 1u32..20, subsequence(AUDIENCES.to_vec(), 0..=3), vec(section(), 0..4)).prop_map(
        |(name, version, audiences, mut sections)| {
            let audiences: Vec<String> = audiences.into_iter().map(String::from).collect();
            let mut next = 0;
            for s in &mut sections {
                renumber(s, &mut next, &audiences);
            }
            Template { name, version, audiences, sections }
        },
    )
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        (-1000i32..1000).prop_map(|v| f64::from(v) / 100.0),
    ]
}

/// Values that conform to `spec`.
pub fn value(spec: &AnswerSpec) -> BoxedStrategy<AnswerValue> {
    match spec.clone() {
        AnswerSpec::Text => ".{0,20}".prop_map(|value| AnswerValue::Text { value }).boxed(),
        AnswerSpec::Longtext => "(.|\n){0,60}".prop_map(|value| AnswerValue::Longtext { value }).boxed(),
        AnswerSpec::Uri => "https://[a-z]{1,8}\\.example/[a-z0-9]{0,6}".prop_map(|value| AnswerValue::Uri { value }).boxed(),
        AnswerSpec::Flag => any::<bool>().prop_map(|value| AnswerValue::Flag { value }).boxed(),
        AnswerSpec::Number { unit } => (finite(), any::<bool>())
            .prop_map(move |(value, with_unit)| AnswerValue::Number { value, unit: if with_unit { unit.clone() } else { None } })
            .boxed(),
        AnswerSpec::Enum { choices } => proptest::sample::select(choices).prop_map(|value| AnswerValue::Enum { value }).boxed(),
        AnswerSpec::Metricset { metrics } => subsequence(metrics.clone(), 1..=metrics.len())
            .prop_flat_map(|names| vec(finite(), names.len()).prop_map(move |vals| names.iter().cloned().zip(vals).collect()))
            .prop_map(|values: BTreeMap<String, f64>| AnswerValue::Metricset { values })
            .boxed(),
    }
}

pub fn timestamp(max_hours: i64) -> impl Strategy<Value = Timestamp> {
    (0..=max_hours).prop_map(|h| Timestamp::from_unix(1_700_000_000 + h * 3600).unwrap())
}

fn source() -> impl Strategy<Value = Source> {
    prop_oneof![Just(Source::Human), Just(Source::Auto)]
}

pub fn provenance() -> impl Strategy<Value = Provenance> {
    ("[A-Za-z ]{1,10}", role(), timestamp(1000), source(), "r[0-9]{1,3}-[0-9a-f]{16}").prop_map(
        |(author, role, recorded_at, source, record_id)| Provenance { author, role, recorded_at, source, record_id },
    )
}

/// A template plus a sheet answering a random subset of its questions.
pub fn template_and_sheet() -> impl Strategy<Value = (Template, FactSheet)> {
    template().prop_flat_map(|t| {
        let answers: Vec<BoxedStrategy<Option<(String, Answer)>>> = t
            .questions()
            .into_iter()
            .map(|q| {
                let id = q.id.clone();
                proptest::option::of((value(&q.answer), provenance()).prop_map(move |(value, provenance)| {
                    (id.clone(), Answer { value, provenance })
                }))
                .boxed()
            })
            .collect();
        (Just(t), answers, timestamp(2000), 0usize..5, "[a-z0-9-]{1,8}", "[0-9.]{1,4}").prop_map(
            |(t, answers, as_of, orphaned, subject_id, subject_version)| {
                let sheet = FactSheet {
                    subject_id,
                    subject_version,
                    template_ref: t.template_ref(),
                    as_of,
                    answers: answers.into_iter().flatten().collect(),
                    orphaned,
                };
                (t, sheet)
            },
        )
    })
}

/// The id each random log record would answer to, by kind:
/// `Some(index)` picks a template question, `None` a question the template lacks.
#[derive(Debug, Clone)]
pub struct RecordPlan {
    pub question: Option<prop::sample::Index>,
    pub other_template: bool,
    pub wrong_kind: bool,
    pub recorded_at: Timestamp,
    pub supersede: Option<prop::sample::Index>,
    pub value_seed: AnswerValue,
}

/// Fact logs for one subject under `template`, with ties in time, supersession
/// chains, records for another template and for removed questions, and values
/// that no longer fit their question.
pub fn log(template: Template, max_len: usize) -> impl Strategy<Value = Vec<FactRecord>> {
    let plan = (
        proptest::option::weighted(0.9, any::<prop::sample::Index>()),
        proptest::bool::weighted(0.1),
        proptest::bool::weighted(0.1),
        timestamp(24),
        proptest::option::weighted(0.3, any::<prop::sample::Index>()),
        ".{0,6}".prop_map(AnswerValue::text),
    )
        .prop_map(|(question, other_template, wrong_kind, recorded_at, supersede, value_seed)| RecordPlan {
            question,
            other_template,
            wrong_kind,
            recorded_at,
            supersede,
            value_seed,
        });
    vec(plan, 0..=max_len).prop_flat_map(move |plans| {
        let t = template.clone();
        let values: Vec<BoxedStrategy<AnswerValue>> = plans
            .iter()
            .map(|p| match (&p.question, p.wrong_kind) {
                (Some(i), false) if !t.questions().is_empty() => value(&t.questions()[i.index(t.questions().len())].answer),
                _ => Just(p.value_seed.clone()).boxed(),
            })
            .collect();
        let t = t.clone();
        (Just(plans), values).prop_map(move |(plans, values)| build_log(&t, plans, values))
    })
}

fn build_log(t: &Template, plans: Vec<RecordPlan>, values: Vec<AnswerValue>) -> Vec<FactRecord> {
    let questions = t.questions();
    let mut out: Vec<FactRecord> = Vec::new();
    for (i, (plan, value)) in plans.into_iter().zip(values).enumerate() {
        let seq = i as u64 + 1;
        let question_id = match (&plan.question, questions.is_empty()) {
            (Some(ix), false) => questions[ix.index(questions.len())].id.clone(),
            _ => "removed_question".to_string(),
        };
        let name = if plan.other_template { "unrelated".to_string() } else { t.base_name().to_string() };
        // Supersede an earlier record of the same question, if there is one.
        let earlier: Vec<&FactRecord> = out.iter().filter(|r| r.question_id == question_id).collect();
        let supersedes = match (&plan.supersede, earlier.is_empty()) {
            (Some(ix), false) => Some(earlier[ix.index(earlier.len())].record_id.clone()),
            _ => None,
        };
        out.push(FactRecord {
            seq,
            record_id: format!("r{seq}-{:016x}", seq * 7919),
            subject_id: "subject".into(),
            subject_version: "1".into(),
            template_ref: TemplateRef { name, version: t.version },
            question_id,
            stage: Stage::Development,
            role: Role::DataScientist,
            author: "gen".into(),
            recorded_at: plan.recorded_at,
            source: Source::Human,
            value,
            supersedes,
        });
    }
    out
}

/// What a sheet should contain, found by scanning every record for every
/// question with no indexes or precomputed sets.
pub fn oracle_assemble(records: &[FactRecord], template: &Template, as_of: Option<Timestamp>) -> (BTreeMap<String, Answer>, usize, Timestamp) {
    let mine = |r: &FactRecord| r.subject_id == "subject" && r.subject_version == "1" && r.template_ref.name == template.base_name();
    let mut cutoff = Timestamp::epoch();
    match as_of {
        Some(t) => cutoff = t,
        None => {
            for r in records {
                if mine(r) && r.recorded_at > cutoff {
                    cutoff = r.recorded_at;
                }
            }
        }
    }
    let visible = |r: &FactRecord| mine(r) && r.recorded_at <= cutoff;
    let fits = |r: &FactRecord| match template.questions().into_iter().find(|q| q.id == r.question_id) {
        Some(q) => r.value.conforms_to(&q.answer).is_ok(),
        None => false,
    };

    let mut orphaned = 0;
    for r in records {
        if visible(r) && !fits(r) {
            orphaned += 1;
        }
    }

    let mut answers = BTreeMap::new();
    for q in template.questions() {
        let mut winner: Option<&FactRecord> = None;
        for r in records {
            if !visible(r) || r.question_id != q.id || !fits(r) {
                continue;
            }
            let mut replaced = false;
            for other in records {
                if visible(other) && other.supersedes.as_deref() == Some(r.record_id.as_str()) {
                    replaced = true;
                }
            }
            if replaced {
                continue;
            }
            let better = match winner {
                None => true,
                Some(w) => r.recorded_at > w.recorded_at || (r.recorded_at == w.recorded_at && r.seq > w.seq),
            };
            if better {
                winner = Some(r);
            }
        }
        if let Some(w) = winner {
            let provenance = Provenance {
                author: w.author.clone(),
                role: w.role.clone(),
                recorded_at: w.recorded_at,
                source: w.source,
                record_id: w.record_id.clone(),
            };
            answers.insert(q.id.clone(), Answer { value: w.value.clone(), provenance });
        }
    }
    (answers, orphaned, cutoff)
}

/// Writes `records` as a fact log in `dir`, one JSON object per line.
pub fn write_log(dir: &std::path::Path, records: &[FactRecord]) {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).unwrap());
        text.push('\n');
    }
    std::fs::write(dir.join("subject__1.factlog"), text).unwrap();
}

use fsforge::methodology::{BankKind, EvalSession, Evaluator, Flag, ProposedItem, Response, SessionDraft, SubjectRef};

pub const LABELS: [&str; 3] = ["Training data licensing", "training  DATA licensing", "Energy use"];

#[derive(Debug, Clone)]
pub struct SessionPlan {
    pub flags: Vec<(prop::sample::Index, Flag)>,
    pub proposals: Vec<prop::sample::Index>,
    pub ranked: bool,
    pub shuffle_seed: u64,
}

fn flag() -> impl Strategy<Value = Flag> {
    prop_oneof![Just(Flag::Extraneous), Just(Flag::Confusing), Just(Flag::Misplaced), Just(Flag::FormatIssue)]
}

pub fn session_plans() -> impl Strategy<Value = Vec<SessionPlan>> {
    vec(
        (vec((any::<prop::sample::Index>(), flag()), 0..8), vec(any::<prop::sample::Index>(), 0..2), any::<bool>(), any::<u64>())
            .prop_map(|(flags, proposals, ranked, shuffle_seed)| SessionPlan { flags, proposals, ranked, shuffle_seed }),
        1..7,
    )
}

/// Builds content evaluation sessions through the public session API.
pub fn build_sessions(t: &Template, plans: &[SessionPlan]) -> Vec<EvalSession> {
    let ids: Vec<String> = t.questions().iter().map(|q| q.id.clone()).collect();
    plans
        .iter()
        .enumerate()
        .map(|(i, plan)| {
            let draft = SessionDraft {
                kind: BankKind::ContentEval,
                template: t.template_ref(),
                subject: Some(SubjectRef { id: "subject".into(), version: "1".into() }),
                audience: None,
                evaluator: Evaluator { name: format!("evaluator {i}"), role: Role::ModelValidator },
                created_at: Some(Timestamp::epoch()),
            };
            let mut s = EvalSession::open(format!("eval-{:04}", i + 1), draft, t).unwrap();
            for (n, (ix, f)) in plan.flags.iter().enumerate() {
                let r = Response {
                    item: n % 12 + 1,
                    target: Some(ids[ix.index(ids.len())].clone()),
                    flags: [*f].into(),
                    note: String::new(),
                    proposed_item: None,
                };
                s.record_response(r, t).unwrap();
            }
            for ix in &plan.proposals {
                let r = Response {
                    item: 1,
                    target: None,
                    flags: [Flag::Missing].into(),
                    note: String::new(),
                    proposed_item: Some(ProposedItem {
                        label: LABELS[ix.index(LABELS.len())].into(),
                        why: String::new(),
                        example: String::new(),
                    }),
                };
                // Only the last proposal on item 1 survives; that is fine for generation.
                s.record_response(r, t).unwrap();
            }
            if plan.ranked {
                let mut order = s.rankable(t);
                let mut state = plan.shuffle_seed | 1;
                for k in (1..order.len()).rev() {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    order.swap(k, (state % (k as u64 + 1)) as usize);
                }
                s.record_ranking(order, t).unwrap();
            }
            s
        })
        .collect()
}

use fsforge::factstore::{FactDraft, Store};

/// The facts behind the golden renders: most of the catalog template
/// answered, one correction, some questions left open.
pub fn scripted_drafts() -> Vec<FactDraft> {
    let d = |q: &str, role: Role, author: &str, at: &str, value: AnswerValue| FactDraft {
        subject_id: "object-detector".into(),
        subject_version: "1.0".into(),
        question_id: q.into(),
        stage: None,
        role,
        author: author.into(),
        recorded_at: at.parse().unwrap(),
        source: None,
        value,
        supersedes: None,
    };
    vec![
        d("q1", Role::BusinessOwner, "Ana", "2024-03-01T09:00:00Z", AnswerValue::text("Detect objects in photos")),
        d("q2", Role::BusinessOwner, "Ana", "2024-03-01T09:05:00Z", AnswerValue::text("Retail shelf images")),
        d(
            "q3",
            Role::DataScientist,
            "Priya",
            "2024-03-04T14:00:00Z",
            AnswerValue::longtext("120k labelled shelf photos from 40 stores.\nLabels reviewed twice."),
        ),
        d("q5", Role::DataScientist, "Priya", "2024-03-04T14:10:00Z", AnswerValue::longtext("Input: RGB image. Output: boxes with class labels and scores.")),
        d(
            "q6",
            Role::ModelValidator,
            "eval-pipeline",
            "2024-03-10T08:00:00Z",
            AnswerValue::Metricset {
                values: [("bias".to_string(), 0.02), ("accuracy".to_string(), 0.9134), ("domain_shift".to_string(), 0.15)].into(),
            },
        ),
        d("q7", Role::ModelValidator, "Carmen", "2024-03-11T10:00:00Z", AnswerValue::longtext("Held-out set of 8k images from 5 unseen stores.")),
        d("q8", Role::DataScientist, "Priya", "2024-03-12T10:00:00Z", AnswerValue::longtext("Well-lit, front-facing shelves. ".repeat(6).trim_end().to_string())),
        d("q9", Role::AiOperations, "Omar", "2024-03-20T16:00:00Z", AnswerValue::longtext("Glare and motion blur; heavily occluded products.")),
        d("q1", Role::BusinessOwner, "Ana", "2024-03-21T09:00:00Z", AnswerValue::text("Detect and count products on retail shelves")),
        d("q10", Role::DataScientist, "Priya", "2024-04-02T12:00:00Z", AnswerValue::text("Saliency maps per detection")),
    ]
}

/// Records [`scripted_drafts`] into `store`, making the second q1 answer a
/// correction of the first. Returns the records in order.
pub fn record_scripted(store: &Store, t: &Template) -> Vec<FactRecord> {
    let mut out: Vec<FactRecord> = Vec::new();
    for mut draft in scripted_drafts() {
        if draft.question_id == "q1" {
            draft.supersedes = out.iter().find(|r| r.question_id == "q1").map(|r| r.record_id.clone());
        }
        out.push(store.record_fact(draft, t).unwrap());
    }
    out
}

/// Instant the golden sheet is assembled at; the last scripted fact comes later.
pub const GOLDEN_AS_OF: &str = "2024-04-01T00:00:00Z";

/// The reference evaluation: four content evaluations of the catalog sheet.
/// Sessions 1 to 3 flag q9 as extraneous, sessions 1 and 2 also propose
/// "Training data licensing", and every ranking puts q9 near the bottom.
///
/// Hand tally at 0.5 thresholds:
/// - q9 extraneous in 3 of 4 sessions (0.75); normalized rank positions
///   9/10, 9/10, 9/9 and 8/9 average 0.922, so quartile 4. Remove.
/// - the label is proposed in 2 of 4 sessions (0.5). Add.
/// - no other flag is raised. Nothing else.
pub fn reference_sessions(t: &Template) -> Vec<EvalSession> {
    reference_sessions_sized(t, 4)
}

/// The first `n` sessions of [`reference_sessions`].
pub fn reference_sessions_sized(t: &Template, n: usize) -> Vec<EvalSession> {
    let base: Vec<String> = ["q1", "q2", "q8", "q6", "q3", "q5", "q4", "q7", "q10"].map(String::from).to_vec();
    (1..=n)
        .map(|i| {
            let draft = SessionDraft {
                kind: BankKind::ContentEval,
                template: t.template_ref(),
                subject: Some(SubjectRef { id: "object-detector".into(), version: "1.0".into() }),
                audience: None,
                evaluator: Evaluator { name: format!("Evaluator {i}"), role: Role::ModelValidator },
                created_at: Some("2024-04-05T10:00:00Z".parse().unwrap()),
            };
            let mut s = EvalSession::open(format!("eval-{i:04}"), draft, t).unwrap();
            if i <= 3 {
                let r = Response {
                    item: 5,
                    target: Some("q9".into()),
                    flags: [Flag::Extraneous].into(),
                    note: "Operations detail a catalog reader does not need".into(),
                    proposed_item: None,
                };
                s.record_response(r, t).unwrap();
            }
            let mut order = base.clone();
            if i <= 2 {
                let r = Response {
                    item: 1,
                    target: None,
                    flags: [Flag::Missing].into(),
                    note: String::new(),
                    proposed_item: Some(ProposedItem {
                        label: if i == 1 { "Training data licensing".into() } else { "training data  licensing".into() },
                        why: "Legal needs to clear reuse".into(),
                        example: "CC-BY-4.0 for all images".into(),
                    }),
                };
                s.record_response(r, t).unwrap();
                // 11 elements, q9 at position 10.
                order.insert(2, "Training data licensing".into());
                order.insert(9, "q9".into());
            } else if i == 3 {
                // 10 elements, q9 last.
                order.push("q9".into());
            } else {
                // 10 elements, q9 at position 9.
                order.insert(8, "q9".into());
            }
            s.record_ranking(order, t).unwrap();
            s
        })
        .collect()
}

/// Prompts of the catalog fixture, in order.
pub const CATALOG_PROMPTS: [&str; 10] = [
    "What is this model for?",
    "What domain was it designed for?",
    "Can you describe information about the training data (if appropriate)?",
    "Can you provide information about the model (if appropriate)?",
    "What are the model's inputs and outputs?",
    "What are the model's performance metrics?",
    "Can you provide information about the test set?",
    "In what circumstances does the model do particularly well (within expected use cases of the model)? (e.g., inputs that work well)",
    "Based on your experience, in what circumstances does the model perform poorly? (e.g. domain shift, specific kinds of input, observations from experience)",
    "Can a user get an explanation of how your model makes its decisions?",
];

/// Prompts of the ethics board fixture by id, q1 to q8.
pub const BOARD_PROMPTS: [&str; 8] = [
    "What does this service do?",
    "Provide details about training data including distributions",
    "Provide details about the test data including distributions",
    "What classes of model are used in the service?",
    "Describe data handling protocols in detail",
    "Describe GDPR compliance in detail",
    "What kinds of inputs will be handled poorly?",
    "Describe all issues of possible bias and fairness (even if there are no protected attributes in the training data)",
];

/// One append: question index, value, hour offset, and which earlier answer
/// to the same question to supersede, if any.
pub type AppendStep = (usize, AnswerValue, i64, Option<prop::sample::Index>);

/// Templates with random valid appends against them.
pub fn appends() -> impl Strategy<Value = (Template, Vec<AppendStep>)> {
    prop_oneof![Just(fsforge::fixtures::max_catalog()), template().prop_filter("questions", |t| !t.questions().is_empty())]
        .prop_flat_map(|t| {
            let n = t.questions().len();
            let specs: Vec<_> = t.questions().iter().map(|q| q.answer.clone()).collect();
            let draft = (0..n).prop_flat_map(move |i| {
                (Just(i), value(&specs[i]), 0i64..48, proptest::option::of(any::<prop::sample::Index>()))
            });
            (Just(t), proptest::collection::vec(draft, 1..25))
        })
}

/// Records `step` through the store; `ids` tracks (question, record id) so far.
pub fn append(store: &Store, t: &Template, step: AppendStep, ids: &mut Vec<(String, String)>) -> Result<FactRecord, String> {
    let (i, value, hour, supersede) = step;
    let q = t.questions()[i];
    let earlier: Vec<&String> = ids.iter().filter(|(qid, _)| *qid == q.id).map(|(_, rid)| rid).collect();
    let supersedes = match supersede {
        Some(ix) if !earlier.is_empty() => Some(earlier[ix.index(earlier.len())].clone()),
        _ => None,
    };
    let draft = FactDraft {
        subject_id: "s".into(),
        subject_version: "1".into(),
        question_id: q.id.clone(),
        stage: None,
        role: q.role.clone(),
        author: "a".into(),
        recorded_at: Timestamp::from_unix(1_700_000_000 + hour * 3600).unwrap(),
        source: None,
        value,
        supersedes,
    };
    let record = store.record_fact(draft, t).map_err(|e| e.to_string())?;
    ids.push((q.id.clone(), record.record_id.clone()));
    Ok(record)
}
