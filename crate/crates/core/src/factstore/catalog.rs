//! Named, versioned templates kept alongside a store (`<store>/templates/`).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::template::{parse_template, serialize_template, Diagnostic, Template, TemplateRef};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("template does not parse")]
    Invalid(Vec<Diagnostic>),
    #[error("document declares {found}, but it was submitted as {expected}")]
    NameMismatch { expected: String, found: String },
    #[error("template name '{0}' cannot be stored (use [A-Za-z0-9._-] only)")]
    BadName(String),
    #[error("template {0} already exists with different content")]
    Conflict(TemplateRef),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutOutcome {
    Created,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub version: u32,
    pub questions: usize,
}

/// Templates are stored canonically, one file per `name@version`. A stored
/// version is never replaced by different content.
pub struct TemplateCatalog {
    dir: PathBuf,
}

fn storable(name: &str) -> bool {
    !name.is_empty() && !name.starts_with('.') && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

impl TemplateCatalog {
    pub fn open(store_root: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let dir = store_root.as_ref().join("templates");
        fs::create_dir_all(&dir).map_err(|source| CatalogError::Io { path: dir.clone(), source })?;
        Ok(TemplateCatalog { dir })
    }

    fn path(&self, r: &TemplateRef) -> PathBuf {
        self.dir.join(format!("{}@v{}.fst", r.name, r.version))
    }

    /// Parses and stores `text`, which must declare exactly `expected`.
    pub fn put(&self, expected: &TemplateRef, text: &str) -> Result<(Template, PutOutcome), CatalogError> {
        let template = self.check(expected, text)?;
        let canonical = serialize_template(&template);
        let path = self.path(expected);
        let io = |source| CatalogError::Io { path: path.clone(), source };
        match fs::read_to_string(&path) {
            Ok(existing) if existing == canonical => return Ok((template, PutOutcome::Unchanged)),
            Ok(_) => return Err(CatalogError::Conflict(expected.clone())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io(e)),
        }
        let tmp = self.dir.join(format!(".{}@v{}.tmp-{}", expected.name, expected.version, std::process::id()));
        fs::write(&tmp, &canonical).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok((template, PutOutcome::Created))
    }

    /// Validation half of [`put`](Self::put), without writing anything.
    pub fn check(&self, expected: &TemplateRef, text: &str) -> Result<Template, CatalogError> {
        let template = parse_template(text).map_err(CatalogError::Invalid)?;
        if template.name != expected.name || template.version != expected.version {
            return Err(CatalogError::NameMismatch {
                expected: expected.to_string(),
                found: format!("{}@{}", template.name, template.version),
            });
        }
        if !storable(&template.name) {
            return Err(CatalogError::BadName(template.name));
        }
        Ok(template)
    }

    pub fn get(&self, r: &TemplateRef) -> Result<Option<Template>, CatalogError> {
        let path = self.path(r);
        match fs::read_to_string(&path) {
            Ok(text) => parse_template(&text).map(Some).map_err(CatalogError::Invalid),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(CatalogError::Io { path, source }),
        }
    }

    /// Stored templates ordered by name, then version.
    pub fn list(&self) -> Result<Vec<CatalogEntry>, CatalogError> {
        let entries = fs::read_dir(&self.dir).map_err(|source| CatalogError::Io { path: self.dir.clone(), source })?;
        let mut out = Vec::new();
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".fst") else { continue };
            let Ok(r) = stem.parse::<TemplateRef>() else { continue };
            if let Some(t) = self.get(&r)? {
                out.push(CatalogEntry { name: r.name, version: r.version, questions: t.questions().len() });
            }
        }
        out.sort_by(|a, b| (&a.name, a.version).cmp(&(&b.name, b.version)));
        Ok(out)
    }
}
