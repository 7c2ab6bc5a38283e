use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{assemble, ConformanceError, FactDraft, FactRecord, FactSheet, SubjectKey};
use crate::template::Template;
use crate::time::Timestamp;

const LOG_SUFFIX: &str = ".factlog";

/// A log line that could not be replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorruptLine {
    pub file: PathBuf,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for CorruptLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: line {}: {}", self.file.display(), self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("cannot use store directory {}: {source}", path.display())]
    Location { path: PathBuf, source: io::Error },
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, thiserror::Error)]
pub enum FactError {
    #[error("unknown question '{question}' in template {template}")]
    UnknownQuestion { question: String, template: String },
    #[error("answer to '{question}' rejected: {source}")]
    Conformance { question: String, source: ConformanceError },
    #[error("role {role} may not answer '{question}' (owned by {owner})")]
    RoleNotAllowed { role: String, question: String, owner: String },
    #[error("supersedes target '{0}' does not exist for this subject")]
    SupersedesMissing(String),
    #[error("supersedes target '{record}' answers '{found}', not '{question}'")]
    SupersedesMismatch { record: String, question: String, found: String },
    #[error("{0}")]
    InvalidSubject(String),
    #[error("store is read-only because a log is corrupt ({0})")]
    ReadOnly(CorruptLine),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// One entry of a question's history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub record: FactRecord,
    /// Ids of later records that supersede this one.
    pub superseded_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubjectSummary {
    pub subject_id: String,
    pub subject_version: String,
    pub record_count: usize,
    pub last_recorded_at: Timestamp,
}

#[derive(Default)]
struct LogState {
    records: Vec<FactRecord>,
    by_id: HashMap<String, usize>,
    /// Bytes of the file reflected in `records`.
    len: u64,
}

struct Log {
    key: SubjectKey,
    path: PathBuf,
    state: RwLock<LogState>,
    /// Serialises appends from this process; the file lock covers other processes.
    writer: Mutex<()>,
}

/// A directory of fact logs, one per subject.
///
/// Appends to one subject are serialised (within the process by a mutex, across
/// processes by an exclusive file lock) and are flushed to disk before
/// [`Store::record_fact`] returns. Readers see a consistent prefix of each log.
pub struct Store {
    root: PathBuf,
    logs: RwLock<BTreeMap<SubjectKey, Arc<Log>>>,
    corrupt: Vec<CorruptLine>,
}

impl Store {
    /// Opens (creating if needed) a store directory and replays every log in it.
    ///
    /// Corrupt lines do not fail the open: they are skipped, reported by
    /// [`Store::corruption`], and the store refuses further appends.
    pub fn open(root: impl AsRef<Path>) -> Result<Store, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|source| StoreError::Location { path: root.clone(), source })?;
        let entries = fs::read_dir(&root).map_err(|source| StoreError::Location { path: root.clone(), source })?;
        let mut paths = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| StoreError::Location { path: root.clone(), source })?;
            let path = entry.path();
            if path.is_file() && path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(LOG_SUFFIX)) {
                paths.push(path);
            }
        }
        paths.sort();

        let mut logs = BTreeMap::new();
        let mut corrupt = Vec::new();
        for path in paths {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let stem = &name[..name.len() - LOG_SUFFIX.len()];
            let Some((id, version)) = stem.split_once("__") else {
                corrupt.push(CorruptLine { file: path.clone(), line: 0, message: "file name is not SUBJECT__VERSION.factlog".into() });
                continue;
            };
            let key = SubjectKey::new(id, version);
            let (state, problems) = replay(&path, &key)?;
            corrupt.extend(problems);
            logs.insert(key.clone(), Arc::new(Log { key, path, state: RwLock::new(state), writer: Mutex::new(()) }));
        }
        Ok(Store { root, logs: RwLock::new(logs), corrupt })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Lines that failed to replay at open time.
    pub fn corruption(&self) -> &[CorruptLine] {
        &self.corrupt
    }

    pub fn is_read_only(&self) -> bool {
        !self.corrupt.is_empty()
    }

    /// The largest `seq` in any log.
    pub fn high_water(&self) -> u64 {
        self.all_logs().iter().map(|log| log.snapshot().last().map_or(0, |r| r.seq)).max().unwrap_or(0)
    }

    pub fn record_count(&self) -> usize {
        self.all_logs().iter().map(|log| log.snapshot().len()).sum()
    }

    fn all_logs(&self) -> Vec<Arc<Log>> {
        self.logs.read().expect("lock").values().cloned().collect()
    }

    fn log(&self, key: &SubjectKey) -> Option<Arc<Log>> {
        self.logs.read().expect("lock").get(key).cloned()
    }

    fn log_or_create(&self, key: &SubjectKey) -> Arc<Log> {
        if let Some(log) = self.log(key) {
            return log;
        }
        let mut logs = self.logs.write().expect("lock");
        logs.entry(key.clone())
            .or_insert_with(|| {
                Arc::new(Log {
                    key: key.clone(),
                    path: self.root.join(key.file_name()),
                    state: RwLock::default(),
                    writer: Mutex::new(()),
                })
            })
            .clone()
    }

    /// Every record of one subject, in `seq` order.
    pub fn records(&self, subject_id: &str, subject_version: &str) -> Vec<FactRecord> {
        let key = SubjectKey::new(subject_id, subject_version);
        match self.log(&key) {
            Some(log) => log.snapshot(),
            // Another process may have started this log since we opened.
            None if key.validate().is_ok() && self.root.join(key.file_name()).is_file() => {
                self.log_or_create(&key).snapshot()
            }
            None => Vec::new(),
        }
    }

    /// Registers logs created by other processes since open.
    fn discover(&self) {
        let Ok(entries) = fs::read_dir(&self.root) else { return };
        for entry in entries.flatten() {
            if let Some(key) = key_from_path(&entry.path()) {
                if key.validate().is_ok() && self.log(&key).is_none() {
                    self.log_or_create(&key);
                }
            }
        }
    }

    /// Validates a draft against `template` and appends it. Returns the new record.
    pub fn record_fact(&self, draft: FactDraft, template: &Template) -> Result<FactRecord, FactError> {
        if let Some(first) = self.corrupt.first() {
            return Err(FactError::ReadOnly(first.clone()));
        }
        let key = SubjectKey::new(&draft.subject_id, &draft.subject_version);
        key.validate().map_err(FactError::InvalidSubject)?;
        let template_ref = template.template_ref();
        let question = template.question(&draft.question_id).ok_or_else(|| FactError::UnknownQuestion {
            question: draft.question_id.clone(),
            template: template_ref.to_string(),
        })?;
        draft
            .value
            .conforms_to(&question.answer)
            .map_err(|source| FactError::Conformance { question: question.id.clone(), source })?;
        if draft.role != question.role && !draft.role.is_override() {
            return Err(FactError::RoleNotAllowed {
                role: draft.role.to_string(),
                question: question.id.clone(),
                owner: question.role.to_string(),
            });
        }
        let stage = draft.stage.unwrap_or_else(|| question.role.stage());
        let source = draft.source.unwrap_or(question.source);

        let log = self.log_or_create(&key);
        let _guard = log.writer.lock().expect("lock");
        let io = |source| StoreError::Io { path: log.path.clone(), source };
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&log.path).map_err(io)?;
        file.lock().map_err(io)?;
        log.catch_up(&mut file).map_err(io)?;

        let mut state = log.state.write().expect("lock");
        if let Some(target) = &draft.supersedes {
            let Some(&index) = state.by_id.get(target) else {
                return Err(FactError::SupersedesMissing(target.clone()));
            };
            let found = &state.records[index].question_id;
            if *found != draft.question_id {
                return Err(FactError::SupersedesMismatch {
                    record: target.clone(),
                    question: draft.question_id.clone(),
                    found: found.clone(),
                });
            }
        }
        let seq = state.records.last().map_or(1, |r| r.seq + 1);
        let mut record = FactRecord {
            seq,
            record_id: String::new(),
            subject_id: draft.subject_id,
            subject_version: draft.subject_version,
            template_ref,
            question_id: draft.question_id,
            stage,
            role: draft.role,
            author: draft.author,
            recorded_at: draft.recorded_at,
            source,
            value: draft.value,
            supersedes: draft.supersedes,
        };
        record.record_id = record_id(&record);
        let mut line = serde_json::to_string(&record).expect("records serialise");
        line.push('\n');
        file.write_all(line.as_bytes()).map_err(io)?;
        file.sync_data().map_err(io)?;
        state.len += line.len() as u64;
        let index = state.records.len();
        state.by_id.insert(record.record_id.clone(), index);
        state.records.push(record.clone());
        Ok(record)
    }

    pub fn assemble_factsheet(
        &self,
        subject_id: &str,
        subject_version: &str,
        template: &Template,
        as_of: Option<Timestamp>,
    ) -> FactSheet {
        assemble(&self.records(subject_id, subject_version), subject_id, subject_version, template, as_of)
    }

    /// All records answering one question, in `seq` order, with supersession marked.
    pub fn history(&self, subject_id: &str, subject_version: &str, question_id: &str) -> Vec<HistoryEntry> {
        let records = self.records(subject_id, subject_version);
        let mut superseders: HashMap<&str, Vec<String>> = HashMap::new();
        for r in &records {
            if let Some(target) = &r.supersedes {
                superseders.entry(target.as_str()).or_default().push(r.record_id.clone());
            }
        }
        records
            .iter()
            .filter(|r| r.question_id == question_id)
            .map(|r| HistoryEntry {
                superseded_by: superseders.get(r.record_id.as_str()).cloned().unwrap_or_default(),
                record: r.clone(),
            })
            .collect()
    }

    /// One row per subject log that has records, ordered by id then version.
    pub fn list_subjects(&self) -> Vec<SubjectSummary> {
        self.discover();
        let logs: Vec<(SubjectKey, Arc<Log>)> =
            self.logs.read().expect("lock").iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        logs.into_iter()
            .filter_map(|(key, log)| {
                let records = log.snapshot();
                let last = records.iter().map(|r| r.recorded_at).max()?;
                Some(SubjectSummary {
                    subject_id: key.subject_id,
                    subject_version: key.subject_version,
                    record_count: records.len(),
                    last_recorded_at: last,
                })
            })
            .collect()
    }
}

impl Log {
    /// Current records, picking up anything another process appended.
    fn snapshot(&self) -> Vec<FactRecord> {
        let on_disk = fs::metadata(&self.path).map(|m| m.len()).unwrap_or(0);
        if on_disk != self.state.read().expect("lock").len {
            let _guard = self.writer.lock().expect("lock");
            if let Ok(mut file) = File::open(&self.path) {
                if file.lock_shared().is_ok() {
                    let _ = self.catch_up(&mut file);
                }
            }
        }
        self.state.read().expect("lock").records.clone()
    }

    /// Re-reads the file if it grew behind our back. Caller holds `writer` and a file lock.
    fn catch_up(&self, file: &mut File) -> io::Result<()> {
        let len = file.metadata()?.len();
        if len == self.state.read().expect("lock").len {
            return Ok(());
        }
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let (state, _) = replay_text(&self.path, &text, &self.key);
        *self.state.write().expect("lock") = state;
        Ok(())
    }
}

fn key_from_path(path: &Path) -> Option<SubjectKey> {
    let name = path.file_name()?.to_str()?;
    let (id, version) = name.strip_suffix(LOG_SUFFIX)?.split_once("__")?;
    Some(SubjectKey::new(id, version))
}

fn replay(path: &Path, key: &SubjectKey) -> Result<(LogState, Vec<CorruptLine>), StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io { path: path.to_path_buf(), source })?;
    Ok(replay_text(path, &text, key))
}

fn replay_text(path: &Path, text: &str, key: &SubjectKey) -> (LogState, Vec<CorruptLine>) {
    let mut state = LogState { len: text.len() as u64, ..LogState::default() };
    let mut problems = Vec::new();
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    for (index, line) in lines.into_iter().enumerate() {
        let bad = |message: String| CorruptLine { file: path.to_path_buf(), line: index + 1, message };
        let record: FactRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                problems.push(bad(format!("malformed record: {e}")));
                continue;
            }
        };
        if record.subject_id != key.subject_id || record.subject_version != key.subject_version {
            problems.push(bad(format!("record for {} {} in log of {key}", record.subject_id, record.subject_version)));
            continue;
        }
        if let Some(last) = state.records.last() {
            if record.seq <= last.seq {
                problems.push(bad(format!("seq {} does not follow {}", record.seq, last.seq)));
                continue;
            }
        } else if record.seq == 0 {
            problems.push(bad("seq must be positive".into()));
            continue;
        }
        if state.by_id.contains_key(&record.record_id) {
            problems.push(bad(format!("duplicate record id '{}'", record.record_id)));
            continue;
        }
        if let Some(target) = &record.supersedes {
            match state.by_id.get(target) {
                Some(&i) if state.records[i].question_id == record.question_id => {}
                Some(_) => {
                    problems.push(bad(format!("supersedes '{target}' which answers a different question")));
                    continue;
                }
                None => {
                    problems.push(bad(format!("supersedes unknown record '{target}'")));
                    continue;
                }
            }
        }
        state.by_id.insert(record.record_id.clone(), state.records.len());
        state.records.push(record);
    }
    (state, problems)
}

/// Content-derived id: stable for identical appends, distinct across subjects and seqs.
fn record_id(record: &FactRecord) -> String {
    let body = serde_json::to_vec(record).expect("records serialise");
    let digest = Sha256::digest(&body);
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("r{}-{hex}", record.seq)
}
