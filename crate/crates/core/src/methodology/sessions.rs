use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{EvalSession, Response, SessionDraft, SessionError};
use crate::template::Template;

#[derive(Debug, thiserror::Error)]
pub enum EvalStoreError {
    #[error("no evaluation session '{0}'")]
    NotFound(String),
    #[error(transparent)]
    Invalid(#[from] SessionError),
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> EvalStoreError + '_ {
    move |source| EvalStoreError::Io { path: path.to_path_buf(), source }
}

/// Sessions kept as one JSON document each under `<store>/evaluations/`.
pub struct EvalStore {
    dir: PathBuf,
    // Read-modify-write of a session file happens under this lock.
    write: Mutex<()>,
}

impl EvalStore {
    pub fn open(store_root: impl AsRef<Path>) -> Result<EvalStore, EvalStoreError> {
        let dir = store_root.as_ref().join("evaluations");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(EvalStore { dir, write: Mutex::new(()) })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Opens a session with the next free id (`eval-0001`, `eval-0002`, ...).
    pub fn create(&self, draft: SessionDraft, template: &Template) -> Result<EvalSession, EvalStoreError> {
        let mut session = EvalSession::open(String::new(), draft, template)?;
        let _guard = self.write.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = self.ids()?.iter().filter_map(|id| id.strip_prefix("eval-")?.parse::<u64>().ok()).max().unwrap_or(0) + 1;
        loop {
            session.id = format!("eval-{next:04}");
            let path = self.path(&session.id);
            // create_new keeps two processes from claiming the same id.
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut file) => {
                    file.write_all(&encode(&session)).map_err(io_err(&path))?;
                    file.sync_all().map_err(io_err(&path))?;
                    return Ok(session);
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => next += 1,
                Err(e) => return Err(io_err(&path)(e)),
            }
        }
    }

    pub fn get(&self, id: &str) -> Result<EvalSession, EvalStoreError> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(EvalStoreError::NotFound(id.to_string()));
        }
        let path = self.path(id);
        let text = match fs::read(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(EvalStoreError::NotFound(id.to_string())),
            Err(e) => return Err(io_err(&path)(e)),
        };
        serde_json::from_slice(&text).map_err(|e| EvalStoreError::Corrupt { path, message: e.to_string() })
    }

    /// Session ids in ascending order.
    pub fn ids(&self) -> Result<Vec<String>, EvalStoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let entry = entry.map_err(io_err(&self.dir))?;
            let name = entry.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn list(&self) -> Result<Vec<EvalSession>, EvalStoreError> {
        self.ids()?.iter().map(|id| self.get(id)).collect()
    }

    pub fn record_response(&self, id: &str, response: Response, template: &Template) -> Result<EvalSession, EvalStoreError> {
        self.update(id, |s| s.record_response(response, template))
    }

    pub fn record_ranking(&self, id: &str, order: Vec<String>, template: &Template) -> Result<EvalSession, EvalStoreError> {
        self.update(id, |s| s.record_ranking(order, template))
    }

    fn update(
        &self,
        id: &str,
        change: impl FnOnce(&mut EvalSession) -> Result<(), SessionError>,
    ) -> Result<EvalSession, EvalStoreError> {
        let _guard = self.write.lock().unwrap_or_else(|e| e.into_inner());
        let mut session = self.get(id)?;
        change(&mut session)?;
        let path = self.path(id);
        let tmp = self.dir.join(format!(".{id}.json.tmp"));
        let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(&encode(&session)).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        Ok(session)
    }
}

fn encode(session: &EvalSession) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(session).expect("sessions always serialize");
    bytes.push(b'\n');
    bytes
}
