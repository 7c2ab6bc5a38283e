use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{ApiError, AppState};
use fsforge::compliance::check_stage_gate;
use fsforge::factstore::{AnswerValue, FactDraft, PutOutcome};
use fsforge::lifecycle::{Role, Source, Stage};
use fsforge::methodology::{builtin_bank, evaluation_report, BankKind, Response as EvalResponse, SessionDraft, Thresholds};
use fsforge::render::{render, Format};
use fsforge::template::{derive_audience_view, lint_template, serialize_template, Template, TemplateRef, Warning};
use fsforge::time::Timestamp;

type Shared = State<Arc<AppState>>;
type ApiResult = Result<Response, ApiError>;

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let mut body = serde_json::to_string_pretty(value).expect("responses serialize");
    body.push('\n');
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn text(content_type: &'static str, body: String) -> Response {
    (StatusCode::OK, [(header::CONTENT_TYPE, content_type)], body).into_response()
}

fn decode<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", format!("request body: {e}")))
}

fn params(uri: &Uri) -> Result<HashMap<String, String>, ApiError> {
    Query::<HashMap<String, String>>::try_from_uri(uri)
        .map(|Query(q)| q)
        .map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))
}

fn parse_param<T: FromStr>(q: &HashMap<String, String>, key: &str, code: &'static str) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    q.get(key)
        .map(|raw| raw.parse::<T>().map_err(|e| ApiError::bad_request(code, e.to_string()).with_path(key.to_string())))
        .transpose()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

fn template_ref(name: &str, version: &str) -> Result<TemplateRef, ApiError> {
    format!("{name}@{version}").parse().map_err(|e: fsforge::template::BadTemplateRef| ApiError::bad_request("bad_template_ref", e.to_string()))
}

fn lookup(state: &AppState, r: &TemplateRef) -> Result<Template, ApiError> {
    state.catalog.get(r)?.ok_or_else(|| ApiError::not_found("unknown_template", format!("no template {r}")))
}

/// The `template=N@V` query parameter, resolved against the catalog.
fn template_param(state: &AppState, q: &HashMap<String, String>) -> Result<Template, ApiError> {
    let r: TemplateRef =
        parse_param(q, "template", "bad_template_ref")?.ok_or_else(|| ApiError::bad_request("template_required", "query parameter 'template=NAME@VERSION' is required"))?;
    lookup(state, &r)
}

fn view(template: &Template, audience: Option<&String>) -> Result<Template, ApiError> {
    match audience {
        None => Ok(template.clone()),
        Some(a) => derive_audience_view(template, a).map_err(|e| ApiError::bad_request("unknown_audience", e.to_string()).with_path("audience")),
    }
}

pub async fn not_found(uri: Uri) -> ApiError {
    ApiError::not_found("not_found", format!("no route for {}", uri.path()))
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
}

/// Body of a successful template PUT.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateAccepted {
    pub template: TemplateRef,
    /// `created`, `unchanged`, or `checked` for dry runs.
    pub outcome: String,
    pub questions: usize,
    pub warnings: Vec<Warning>,
}

pub async fn put_template(State(state): Shared, Path((name, version)): Path<(String, String)>, uri: Uri, body: Bytes) -> ApiResult {
    let r = template_ref(&name, &version)?;
    let q = params(&uri)?;
    let dry_run = parse_param::<bool>(&q, "dry_run", "invalid_query")?.unwrap_or(false);
    let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("invalid_body", "template text must be UTF-8"))?;
    blocking(move || {
        let (template, outcome, status) = if dry_run {
            (state.catalog.check(&r, &text)?, "checked", StatusCode::OK)
        } else {
            match state.catalog.put(&r, &text)? {
                (t, PutOutcome::Created) => (t, "created", StatusCode::CREATED),
                (t, PutOutcome::Unchanged) => (t, "unchanged", StatusCode::OK),
            }
        };
        let accepted = TemplateAccepted {
            template: template.template_ref(),
            outcome: outcome.to_string(),
            questions: template.questions().len(),
            warnings: lint_template(&template),
        };
        Ok(json(status, &accepted))
    })
    .await
}

pub async fn get_template(State(state): Shared, Path((name, version)): Path<(String, String)>, uri: Uri) -> ApiResult {
    let r = template_ref(&name, &version)?;
    let q = params(&uri)?;
    blocking(move || {
        let template = view(&lookup(&state, &r)?, q.get("audience"))?;
        Ok(text("text/plain; charset=utf-8", serialize_template(&template)))
    })
    .await
}

pub async fn list_templates(State(state): Shared) -> ApiResult {
    blocking(move || Ok(json(StatusCode::OK, &state.catalog.list()?))).await
}

pub async fn list_subjects(State(state): Shared) -> ApiResult {
    blocking(move || Ok(json(StatusCode::OK, &state.store.list_subjects()))).await
}

/// Body of `POST /subjects/{id}/{version}/facts`. The subject comes from the
/// path and the role from the `X-Role` header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactInput {
    pub template: TemplateRef,
    pub question_id: String,
    pub author: String,
    /// Defaults to the time the request is handled.
    #[serde(default)]
    pub recorded_at: Option<Timestamp>,
    #[serde(default)]
    pub stage: Option<Stage>,
    #[serde(default)]
    pub source: Option<Source>,
    pub value: AnswerValue,
    #[serde(default)]
    pub supersedes: Option<String>,
}

impl FactInput {
    pub fn into_draft(self, subject_id: String, subject_version: String, role: Role) -> FactDraft {
        FactDraft {
            subject_id,
            subject_version,
            question_id: self.question_id,
            stage: self.stage,
            role,
            author: self.author,
            recorded_at: self.recorded_at.unwrap_or_else(Timestamp::now),
            source: self.source,
            value: self.value,
            supersedes: self.supersedes,
        }
    }
}

fn role_header(headers: &HeaderMap) -> Result<Role, ApiError> {
    let raw = headers
        .get("x-role")
        .ok_or_else(|| ApiError::bad_request("role_required", "the X-Role header is required to record facts"))?;
    let raw = raw.to_str().map_err(|_| ApiError::bad_request("bad_role", "X-Role must be ASCII"))?;
    raw.trim().parse().map_err(|e: fsforge::lifecycle::UnknownRole| ApiError::bad_request("bad_role", e.to_string()))
}

pub async fn post_fact(State(state): Shared, Path((id, version)): Path<(String, String)>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let role = role_header(&headers)?;
    let input: FactInput = decode(&body)?;
    blocking(move || {
        let template = state
            .catalog
            .get(&input.template)?
            .ok_or_else(|| ApiError::unprocessable("unknown_template", format!("no template {}", input.template)).with_path("template"))?;
        let record = state.store.record_fact(input.into_draft(id, version, role), &template)?;
        Ok(json(StatusCode::CREATED, &record))
    })
    .await
}

pub async fn get_factsheet(State(state): Shared, Path((id, version)): Path<(String, String)>, uri: Uri) -> ApiResult {
    let q = params(&uri)?;
    let format = parse_param::<Format>(&q, "format", "bad_format")?.unwrap_or(Format::Machine);
    let as_of = parse_param::<Timestamp>(&q, "as_of", "bad_timestamp")?;
    blocking(move || {
        let template = template_param(&state, &q)?;
        let shown = view(&template, q.get("audience"))?;
        let sheet = state.store.assemble_factsheet(&id, &version, &template, as_of);
        let doc = render(&sheet, &shown, format).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(text(format.content_type(), doc.media))
    })
    .await
}

pub async fn get_history(State(state): Shared, Path((id, version, question)): Path<(String, String, String)>) -> ApiResult {
    blocking(move || Ok(json(StatusCode::OK, &state.store.history(&id, &version, &question)))).await
}

pub async fn get_gate(State(state): Shared, Path((id, version, stage)): Path<(String, String, String)>, uri: Uri) -> ApiResult {
    let stage: Stage = stage.parse().map_err(|e: fsforge::lifecycle::UnknownStage| ApiError::bad_request("bad_stage", e.to_string()))?;
    let q = params(&uri)?;
    let as_of = parse_param::<Timestamp>(&q, "as_of", "bad_timestamp")?;
    blocking(move || {
        let template = template_param(&state, &q)?;
        let sheet = state.store.assemble_factsheet(&id, &version, &template, as_of);
        let decision = check_stage_gate(&sheet, &template, stage).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(json(StatusCode::OK, &decision))
    })
    .await
}

pub async fn post_session(State(state): Shared, body: Bytes) -> ApiResult {
    let draft: SessionDraft = decode(&body)?;
    blocking(move || {
        let template = state
            .catalog
            .get(&draft.template)?
            .ok_or_else(|| ApiError::unprocessable("unknown_template", format!("no template {}", draft.template)).with_path("template"))?;
        if let Some(subject) = &draft.subject {
            let known = state.store.list_subjects().iter().any(|s| s.subject_id == subject.id && s.subject_version == subject.version);
            if !known {
                let message = format!("no facts recorded for subject {} {}", subject.id, subject.version);
                return Err(ApiError::unprocessable("unknown_subject", message).with_path("subject"));
            }
        }
        let session = state.evaluations.create(draft, &template)?;
        Ok(json(StatusCode::CREATED, &session))
    })
    .await
}

pub async fn list_sessions(State(state): Shared) -> ApiResult {
    blocking(move || Ok(json(StatusCode::OK, &state.evaluations.list()?))).await
}

pub async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult {
    blocking(move || Ok(json(StatusCode::OK, &state.evaluations.get(&id)?))).await
}

pub async fn post_response(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let response: EvalResponse = decode(&body)?;
    blocking(move || {
        let session = state.evaluations.get(&id)?;
        let template = lookup(&state, &session.template)?;
        Ok(json(StatusCode::OK, &state.evaluations.record_response(&id, response, &template)?))
    })
    .await
}

/// Body of `POST /evaluations/sessions/{id}/ranking`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingInput {
    pub order: Vec<String>,
}

pub async fn post_ranking(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let input: RankingInput = decode(&body)?;
    blocking(move || {
        let session = state.evaluations.get(&id)?;
        let template = lookup(&state, &session.template)?;
        Ok(json(StatusCode::OK, &state.evaluations.record_ranking(&id, input.order, &template)?))
    })
    .await
}

/// `GET /evaluations/report?template=N@V[&remove=..&reword=..&add=..&move=..][&format=text]`
pub async fn get_report(State(state): Shared, uri: Uri) -> ApiResult {
    let q = params(&uri)?;
    let defaults = Thresholds::default();
    let thresholds = Thresholds {
        remove: parse_param(&q, "remove", "bad_threshold")?.unwrap_or(defaults.remove),
        reword: parse_param(&q, "reword", "bad_threshold")?.unwrap_or(defaults.reword),
        add: parse_param(&q, "add", "bad_threshold")?.unwrap_or(defaults.add),
        move_: parse_param(&q, "move", "bad_threshold")?.unwrap_or(defaults.move_),
    };
    let as_text = match q.get("format").map(String::as_str) {
        None | Some("json") => false,
        Some("text") => true,
        Some(other) => return Err(ApiError::bad_request("bad_format", format!("unknown report format '{other}' (json or text)"))),
    };
    blocking(move || {
        let template = template_param(&state, &q)?;
        let wanted = template.template_ref();
        let sessions: Vec<_> = state.evaluations.list()?.into_iter().filter(|s| s.template == wanted).collect();
        let report = evaluation_report(&sessions, &template, thresholds)?;
        Ok(if as_text { text("text/plain; charset=utf-8", report.to_text()) } else { json(StatusCode::OK, &report) })
    })
    .await
}

#[derive(Serialize)]
struct BankSummary {
    kind: BankKind,
    items: usize,
}

pub async fn list_banks() -> Response {
    let banks: Vec<BankSummary> = BankKind::ALL.iter().map(|k| BankSummary { kind: *k, items: k.items().len() }).collect();
    json(StatusCode::OK, &banks)
}

pub async fn get_bank(Path(kind): Path<String>) -> ApiResult {
    let kind: BankKind = kind.parse().map_err(|e: fsforge::methodology::BadBankKind| ApiError::not_found("unknown_bank", e.to_string()))?;
    Ok(json(StatusCode::OK, &builtin_bank(kind)))
}
