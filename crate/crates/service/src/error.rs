use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::Serialize;

use fsforge::factstore::{CatalogError, FactError, StoreError};
use fsforge::methodology::{EvalStoreError, ReportError, SessionError};
use fsforge::template::Diagnostic;

/// A problem location: a DSL position or a field path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiDiagnostic {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl From<&Diagnostic> for ApiDiagnostic {
    fn from(d: &Diagnostic) -> Self {
        ApiDiagnostic { line: Some(d.line), column: Some(d.column), path: None, message: d.message.clone() }
    }
}

/// The body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ApiDiagnostic>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), code, message: message.into(), diagnostics: Vec::new() }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        let message = self.message.clone();
        self.diagnostics.push(ApiDiagnostic { line: None, column: None, path: Some(path.into()), message });
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut body = serde_json::to_string_pretty(&self).expect("errors serialize");
        body.push('\n');
        (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        match &e {
            CatalogError::Invalid(diags) => {
                let mut err = ApiError::unprocessable("invalid_template", e.to_string());
                err.diagnostics = diags.iter().map(ApiDiagnostic::from).collect();
                err
            }
            CatalogError::NameMismatch { .. } => ApiError::unprocessable("template_mismatch", e.to_string()),
            CatalogError::BadName(_) => ApiError::bad_request("bad_template_name", e.to_string()),
            CatalogError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, "template_conflict", e.to_string()),
            CatalogError::Io { .. } => ApiError::internal(e.to_string()),
        }
    }
}

impl From<FactError> for ApiError {
    fn from(e: FactError) -> Self {
        let message = e.to_string();
        match e {
            FactError::UnknownQuestion { .. } => ApiError::unprocessable("unknown_question", message).with_path("question_id"),
            FactError::Conformance { .. } => ApiError::unprocessable("invalid_answer", message).with_path("value"),
            FactError::RoleNotAllowed { .. } => ApiError::new(StatusCode::FORBIDDEN, "role_not_allowed", message),
            FactError::SupersedesMissing(_) | FactError::SupersedesMismatch { .. } => {
                ApiError::unprocessable("invalid_supersedes", message).with_path("supersedes")
            }
            FactError::InvalidSubject(_) => ApiError::bad_request("invalid_subject", message),
            FactError::ReadOnly(_) => ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "store_read_only", message),
            FactError::Store(_) => ApiError::internal(message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::Ranking(_) => ApiError::unprocessable("invalid_ranking", message).with_path("order"),
            SessionError::TemplateMismatch { .. } => ApiError::unprocessable("template_mismatch", message),
            SessionError::UnknownTarget(_) => ApiError::unprocessable("invalid_response", message).with_path("target"),
            SessionError::ItemOutOfRange { .. } => ApiError::unprocessable("invalid_response", message).with_path("item"),
            SessionError::ProposalRequired | SessionError::EmptyLabel => {
                ApiError::unprocessable("invalid_response", message).with_path("proposed_item")
            }
            _ => ApiError::unprocessable("invalid_session", message),
        }
    }
}

impl From<EvalStoreError> for ApiError {
    fn from(e: EvalStoreError) -> Self {
        match e {
            EvalStoreError::NotFound(_) => ApiError::not_found("unknown_session", e.to_string()),
            EvalStoreError::Invalid(inner) => inner.into(),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::NoSessions => "no_sessions",
            ReportError::MixedTemplates(_) | ReportError::TemplateMismatch { .. } => "template_mismatch",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}
