//! The `fsforge` command line.
//!
//! [`run`] is the whole program with its streams passed in, so tests can drive
//! it without spawning a process. Machine-readable results go to `stdout`,
//! everything meant for a person goes to `stderr`.
//!
//! Exit status: 0 ok, 1 validation failure, 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fsforge::compliance::check_stage_gate;
use fsforge::factstore::{AnswerValue, CatalogError, FactDraft, FactError, Store, TemplateCatalog};
use fsforge::lifecycle::{Role, Source, Stage};
use fsforge::methodology::{
    builtin_bank, evaluation_report, BankKind, EvalStore, EvalStoreError, Evaluator, Flag, ProposedItem, ReportError,
    Response, SessionDraft, SubjectRef, Thresholds,
};
use fsforge::render::{render, Format};
use fsforge::template::{derive_audience_view, diff_templates, lint_template, parse_template, serialize_template, Template, TemplateRef};
use fsforge::time::Timestamp;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fsforge", version, about = "Author FactSheet templates, record facts, render and evaluate FactSheets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check, derive and compare templates
    #[command(subcommand)]
    Template(TemplateCmd),
    /// Record facts
    #[command(subcommand)]
    Fact(FactCmd),
    /// Assemble and render FactSheets
    #[command(subcommand)]
    Sheet(SheetCmd),
    /// Lifecycle stage gates
    #[command(subcommand)]
    Gate(GateCmd),
    /// Evaluation sessions and revision suggestions
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Serve the HTTP API
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Debug, Subcommand)]
enum TemplateCmd {
    /// Parse a template; diagnostics and warnings go to stderr
    Lint { file: PathBuf },
    /// Print the view of a template that one audience sees
    Derive {
        file: PathBuf,
        #[arg(long)]
        audience: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Structural difference between two templates
    Diff {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SubjectArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long = "version", value_name = "V")]
    subject_version: String,
    /// A template file, or NAME@vN from the store's catalog
    #[arg(long)]
    template: String,
}

#[derive(Debug, Subcommand)]
enum FactCmd {
    /// Append one answer to a subject's log and print the stored record
    Add {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long)]
        question: String,
        #[arg(long)]
        role: Role,
        /// Defaults to the role name
        #[arg(long)]
        author: Option<String>,
        /// Defaults to now
        #[arg(long)]
        recorded_at: Option<Timestamp>,
        #[arg(long)]
        stage: Option<Stage>,
        #[arg(long)]
        source: Option<Source>,
        #[arg(long)]
        supersedes: Option<String>,
        /// The answer as JSON, e.g. '{"kind":"text","value":"..."}'
        #[arg(long)]
        value: String,
    },
}

#[derive(Debug, Subcommand)]
enum SheetCmd {
    Render {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long, default_value = "machine")]
        format: Format,
        #[arg(long)]
        as_of: Option<Timestamp>,
        #[arg(long)]
        audience: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum GateCmd {
    /// Print the gate decision; exits 1 when the gate does not pass
    Check {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long)]
        stage: Stage,
        #[arg(long)]
        as_of: Option<Timestamp>,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    /// Open a session and print it
    New {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        kind: BankKind,
        #[arg(long)]
        template: String,
        #[arg(long)]
        evaluator: String,
        #[arg(long, default_value = "data_scientist")]
        evaluator_role: Role,
        /// Subject id, required for evaluation kinds
        #[arg(long, requires = "subject_version")]
        subject: Option<String>,
        #[arg(long = "version", value_name = "V")]
        subject_version: Option<String>,
        #[arg(long)]
        audience: Option<String>,
        #[arg(long)]
        created_at: Option<Timestamp>,
    },
    /// Record a response to one bank item
    Respond {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        session: String,
        /// 1-based bank item
        #[arg(long)]
        item: usize,
        #[arg(long)]
        target: Option<String>,
        #[arg(long = "flag")]
        flags: Vec<Flag>,
        #[arg(long, default_value = "")]
        note: String,
        /// Label of a proposed new question
        #[arg(long)]
        propose: Option<String>,
        #[arg(long, default_value = "", requires = "propose")]
        why: String,
        #[arg(long, default_value = "", requires = "propose")]
        example: String,
    },
    /// Record the importance ranking, most important first
    Rank {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        session: String,
        #[arg(required = true)]
        order: Vec<String>,
    },
    /// Aggregate every session for a template into a suggestion report
    Report {
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Only the suggestions of the report, as JSON
    Suggest {
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Print a built-in question bank
    Bank {
        kind: BankKind,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    template: String,
    #[arg(long, default_value_t = 0.5)]
    remove: f64,
    #[arg(long, default_value_t = 0.5)]
    reword: f64,
    #[arg(long = "move", default_value_t = 0.5)]
    move_: f64,
    #[arg(long, default_value_t = 0.5)]
    add: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    /// Input that the library rejects.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Runs the program on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "fsforge: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Template(cmd) => template_cmd(cmd, out, err),
        Command::Fact(FactCmd::Add { subject, question, role, author, recorded_at, stage, source, supersedes, value }) => {
            let template = load_template(&subject.template, Some(&subject.store))?;
            let value: AnswerValue =
                serde_json::from_str(&value).map_err(|e| CliError::Invalid(format!("--value is not an answer: {e}")))?;
            let store = open_store(&subject.store)?;
            let draft = FactDraft {
                subject_id: subject.subject,
                subject_version: subject.subject_version,
                question_id: question,
                stage,
                author: author.unwrap_or_else(|| role.to_string()),
                role,
                recorded_at: recorded_at.unwrap_or_else(Timestamp::now),
                source,
                value,
                supersedes,
            };
            let record = store.record_fact(draft, &template).map_err(|e| match e {
                FactError::Store(e) => CliError::Io(e.to_string()),
                other => CliError::Invalid(other.to_string()),
            })?;
            emit_json(out, &record)
        }
        Command::Sheet(SheetCmd::Render { subject, format, as_of, audience }) => {
            let template = load_template(&subject.template, Some(&subject.store))?;
            let shown = match &audience {
                Some(a) => derive_audience_view(&template, a).map_err(|e| CliError::Invalid(e.to_string()))?,
                None => template.clone(),
            };
            let store = open_store(&subject.store)?;
            let sheet = store.assemble_factsheet(&subject.subject, &subject.subject_version, &template, as_of);
            let doc = render(&sheet, &shown, format).map_err(|e| CliError::Invalid(e.to_string()))?;
            emit(out, &doc.media)
        }
        Command::Gate(GateCmd::Check { subject, stage, as_of }) => {
            let template = load_template(&subject.template, Some(&subject.store))?;
            let store = open_store(&subject.store)?;
            let sheet = store.assemble_factsheet(&subject.subject, &subject.subject_version, &template, as_of);
            let decision = check_stage_gate(&sheet, &template, stage).map_err(|e| CliError::Invalid(e.to_string()))?;
            emit_json(out, &decision)?;
            for b in &decision.blocking {
                let _ = writeln!(err, "blocked: {} is unanswered (owner {}, due by {})", b.question_id, b.role, b.stage);
            }
            Ok(if decision.pass { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Eval(cmd) => eval_cmd(cmd, out),
        Command::Serve { store, bind } => {
            fsforge_service::run(store, &bind).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

fn template_cmd(cmd: TemplateCmd, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        TemplateCmd::Lint { file } => {
            let template = load_template_file(&file)?;
            for w in lint_template(&template) {
                let _ = writeln!(err, "{}: warning: {}", file.display(), w.message);
            }
            Ok(EXIT_OK)
        }
        TemplateCmd::Derive { file, audience, output } => {
            let template = load_template_file(&file)?;
            let view = derive_audience_view(&template, &audience).map_err(|e| CliError::Invalid(e.to_string()))?;
            let text = serialize_template(&view);
            match output {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                    Ok(EXIT_OK)
                }
                None => emit(out, &text),
            }
        }
        TemplateCmd::Diff { old, new, format } => {
            let diff = diff_templates(&load_template_file(&old)?, &load_template_file(&new)?);
            match format {
                OutputFormat::Text => emit(out, &diff.to_text()),
                OutputFormat::Json => emit_json(out, &diff),
            }
        }
    }
}

fn eval_cmd(cmd: EvalCmd, out: &mut dyn Write) -> CliResult {
    match cmd {
        EvalCmd::New { store, kind, template, evaluator, evaluator_role, subject, subject_version, audience, created_at } => {
            let template = load_template(&template, Some(&store))?;
            // Later commands find the session's template through the catalog.
            let catalog = TemplateCatalog::open(&store).map_err(|e| CliError::Io(e.to_string()))?;
            catalog.put(&template.template_ref(), &serialize_template(&template)).map_err(|e| match e {
                CatalogError::Io { .. } => CliError::Io(e.to_string()),
                other => CliError::Invalid(other.to_string()),
            })?;
            let subject = subject.zip(subject_version).map(|(id, version)| SubjectRef { id, version });
            if let Some(s) = &subject {
                let facts = open_store(&store)?;
                if !facts.list_subjects().iter().any(|x| x.subject_id == s.id && x.subject_version == s.version) {
                    return Err(CliError::Invalid(format!("no facts recorded for subject {} {}", s.id, s.version)));
                }
            }
            let draft = SessionDraft {
                kind,
                template: template.template_ref(),
                subject,
                audience,
                evaluator: Evaluator { name: evaluator, role: evaluator_role },
                created_at,
            };
            let session = open_evals(&store)?.create(draft, &template).map_err(eval_error)?;
            emit_json(out, &session)
        }
        EvalCmd::Respond { store, session, item, target, flags, note, propose, why, example } => {
            let evals = open_evals(&store)?;
            let template = session_template(&store, &evals, &session)?;
            let response = Response {
                item,
                target,
                flags: flags.into_iter().collect(),
                note,
                proposed_item: propose.map(|label| ProposedItem { label, why, example }),
            };
            emit_json(out, &evals.record_response(&session, response, &template).map_err(eval_error)?)
        }
        EvalCmd::Rank { store, session, order } => {
            let evals = open_evals(&store)?;
            let template = session_template(&store, &evals, &session)?;
            emit_json(out, &evals.record_ranking(&session, order, &template).map_err(eval_error)?)
        }
        EvalCmd::Report { report, format } => {
            let report = build_report(&report)?;
            match format {
                OutputFormat::Text => emit(out, &report.to_text()),
                OutputFormat::Json => emit_json(out, &report),
            }
        }
        EvalCmd::Suggest { report } => emit_json(out, &build_report(&report)?.suggestions),
        EvalCmd::Bank { kind, format } => {
            let bank = builtin_bank(kind);
            match format {
                OutputFormat::Json => emit_json(out, &bank),
                OutputFormat::Text => {
                    let text: String = bank.items.iter().enumerate().map(|(i, item)| format!("{}. {item}\n", i + 1)).collect();
                    emit(out, &text)
                }
            }
        }
    }
}

fn build_report(args: &ReportArgs) -> Result<fsforge::methodology::SuggestionReport, CliError> {
    let template = load_template(&args.template, Some(&args.store))?;
    let wanted = template.template_ref();
    let sessions: Vec<_> =
        open_evals(&args.store)?.list().map_err(eval_error)?.into_iter().filter(|s| s.template == wanted).collect();
    let thresholds = Thresholds { remove: args.remove, reword: args.reword, add: args.add, move_: args.move_ };
    evaluation_report(&sessions, &template, thresholds).map_err(|e: ReportError| CliError::Invalid(e.to_string()))
}

fn session_template(store: &Path, evals: &EvalStore, id: &str) -> Result<Template, CliError> {
    let session = evals.get(id).map_err(eval_error)?;
    load_template(&session.template.to_string(), Some(store))
}

fn eval_error(e: EvalStoreError) -> CliError {
    match e {
        EvalStoreError::Invalid(_) | EvalStoreError::NotFound(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Io(e.to_string()),
    }
}

fn open_store(dir: &Path) -> Result<Store, CliError> {
    Store::open(dir).map_err(|e| CliError::Io(e.to_string()))
}

fn open_evals(dir: &Path) -> Result<EvalStore, CliError> {
    EvalStore::open(dir).map_err(|e| CliError::Io(e.to_string()))
}

fn load_template_file(path: &Path) -> Result<Template, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_template(&text).map_err(|diagnostics| {
        let lines: Vec<String> = diagnostics.iter().map(|d| format!("{}:{d}", path.display())).collect();
        CliError::Invalid(lines.join("\n"))
    })
}

/// `spec` names a file; failing that, a `NAME@vN` entry of the store's catalog.
fn load_template(spec: &str, store: Option<&Path>) -> Result<Template, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_template_file(path);
    }
    let (Some(store), Ok(r)) = (store, spec.parse::<TemplateRef>()) else {
        return Err(CliError::Io(format!("cannot read {spec}: no such file")));
    };
    let catalog = TemplateCatalog::open(store).map_err(|e| CliError::Io(e.to_string()))?;
    match catalog.get(&r) {
        Ok(Some(t)) => Ok(t),
        Ok(None) => Err(CliError::Io(format!("{spec} is neither a file nor a template in {}", store.display()))),
        Err(e) => Err(CliError::Io(e.to_string())),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e: io::Error| CliError::Io(e.to_string()))?;
    Ok(EXIT_OK)
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize");
    text.push('\n');
    emit(out, &text)
}
