use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use fsforge::fixtures;
use fsforge_service::{router, AppState};

struct Api {
    _dir: tempfile::TempDir,
    app: Router,
}

struct Reply {
    status: StatusCode,
    content_type: String,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.body))
    }
}

impl Api {
    fn new() -> Api {
        let dir = tempfile::tempdir().unwrap();
        let state = Arc::new(AppState::open(dir.path()).unwrap());
        Api { app: router(state), _dir: dir }
    }

    async fn call(&self, method: Method, uri: &str, headers: &[(&str, &str)], body: impl Into<Body>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let res = self.app.clone().oneshot(req.body(body.into()).unwrap()).await.unwrap();
        let status = res.status();
        let content_type = res.headers().get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
        let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
        Reply { status, content_type, body: String::from_utf8(bytes.to_vec()).unwrap() }
    }

    async fn get(&self, uri: &str) -> Reply {
        self.call(Method::GET, uri, &[], Body::empty()).await
    }

    async fn post(&self, uri: &str, body: Value) -> Reply {
        self.call(Method::POST, uri, &[], body.to_string()).await
    }

    async fn put_catalog(&self) {
        let r = self.call(Method::PUT, "/templates/max_catalog/1", &[], fixtures::MAX_CATALOG).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.body);
    }

    async fn post_fact(&self, role: &str, body: Value) -> Reply {
        self.call(Method::POST, "/subjects/det/1/facts", &[("x-role", role), ("content-type", "application/json")], body.to_string())
            .await
    }
}

fn fact(question: &str, value: Value) -> Value {
    json!({
        "template": "max_catalog@v1",
        "question_id": question,
        "author": "ana",
        "recorded_at": "2024-03-01T00:00:00Z",
        "value": value,
    })
}

#[tokio::test]
async fn template_put_is_idempotent_and_conflicts_on_change() {
    let api = Api::new();
    api.put_catalog().await;
    let again = api.call(Method::PUT, "/templates/max_catalog/v1", &[], fixtures::MAX_CATALOG).await;
    assert_eq!(again.status, StatusCode::OK);
    assert_eq!(again.json()["outcome"], "unchanged");
    assert_eq!(again.json()["questions"], 10);
    let changed = fixtures::MAX_CATALOG.replace("What is this model for?", "Why?");
    let conflict = api.call(Method::PUT, "/templates/max_catalog/1", &[], changed).await;
    assert_eq!(conflict.status, StatusCode::CONFLICT);
    assert_eq!(conflict.json()["code"], "template_conflict");
}

#[tokio::test]
async fn duplicate_question_ids_come_back_with_positions() {
    let api = Api::new();
    let text = "template \"t\" v1\nsection \"S\"\n  question q1 \"A?\"\n  question q1 \"B?\"\nend\n";
    let r = api.call(Method::PUT, "/templates/t/1", &[], text).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.content_type, "application/json");
    let body = r.json();
    assert_eq!(body["code"], "invalid_template");
    assert_eq!(body["diagnostics"][0]["line"], 4);
    assert!(body["diagnostics"][0]["message"].as_str().unwrap().contains("q1"));
    // Nothing was stored.
    assert_eq!(api.get("/templates/t/1").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn dry_run_does_not_store() {
    let api = Api::new();
    let r = api.call(Method::PUT, "/templates/max_catalog/1?dry_run=true", &[], fixtures::MAX_CATALOG).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["outcome"], "checked");
    assert_eq!(api.get("/templates/max_catalog/1").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn version_in_path_must_match_the_text() {
    let api = Api::new();
    let r = api.call(Method::PUT, "/templates/max_catalog/2", &[], fixtures::MAX_CATALOG).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "template_mismatch");
}

#[tokio::test]
async fn facts_need_a_role_header() {
    let api = Api::new();
    api.put_catalog().await;
    let body = fact("q1", json!({"kind": "text", "value": "detect"})).to_string();
    let r = api.call(Method::POST, "/subjects/det/1/facts", &[], body.clone()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["code"], "role_required");
    let r = api.call(Method::POST, "/subjects/det/1/facts", &[("x-role", "janitor")], body).await;
    assert_eq!(r.json()["code"], "bad_role");
}

#[tokio::test]
async fn recording_and_rejecting_facts() {
    let api = Api::new();
    api.put_catalog().await;
    let ok = api.post_fact("business_owner", fact("q1", json!({"kind": "text", "value": "detect"}))).await;
    assert_eq!(ok.status, StatusCode::CREATED, "{}", ok.body);
    assert_eq!(ok.json()["seq"], 1);
    assert_eq!(ok.json()["stage"], "conception");

    let wrong_kind = api.post_fact("business_owner", fact("q1", json!({"kind": "flag", "value": true}))).await;
    assert_eq!(wrong_kind.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(wrong_kind.json()["code"], "invalid_answer");

    let unknown = api.post_fact("business_owner", fact("q99", json!({"kind": "text", "value": "x"}))).await;
    assert_eq!(unknown.json()["code"], "unknown_question");

    let not_owner = api.post_fact("ai_operations", fact("q1", json!({"kind": "text", "value": "x"}))).await;
    assert_eq!(not_owner.status, StatusCode::FORBIDDEN);

    let mut extra = fact("q2", json!({"kind": "text", "value": "x"}));
    extra["color"] = json!("red");
    let r = api.post_fact("business_owner", extra).await;
    assert_eq!((r.status, r.json()["code"].as_str()), (StatusCode::BAD_REQUEST, Some("invalid_json")));

    let history = api.get("/subjects/det/1/history/q1").await.json();
    assert_eq!(history.as_array().unwrap().len(), 1);
    let subjects = api.get("/subjects").await.json();
    assert_eq!(subjects[0]["subject_id"], "det");
}

#[tokio::test]
async fn empty_subject_exports_every_question_unanswered() {
    let api = Api::new();
    api.put_catalog().await;
    let r = api.get("/subjects/nobody/1/factsheet?template=max_catalog@v1").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type, "application/json");
    let sheet = r.json();
    let questions: Vec<&Value> = sheet["sections"].as_array().unwrap().iter().flat_map(|s| s["questions"].as_array().unwrap()).collect();
    assert_eq!(questions.len(), 10);
    assert!(questions.iter().all(|q| q["answered"] == false && q["answer"].is_null()));
    assert_eq!(sheet["completeness"]["required_answered"], 0);
}

#[tokio::test]
async fn factsheet_formats_and_audience_views() {
    let api = Api::new();
    api.put_catalog().await;
    api.post_fact("business_owner", fact("q1", json!({"kind": "text", "value": "detect"}))).await;
    for format in ["summary", "report", "slides"] {
        let r = api.get(&format!("/subjects/det/1/factsheet?template=max_catalog@v1&format={format}")).await;
        assert_eq!(r.status, StatusCode::OK);
        assert!(r.content_type.starts_with("text/plain"));
        assert!(r.body.contains("detect"), "{format}: {}", r.body);
    }
    let bad = api.get("/subjects/det/1/factsheet?template=max_catalog@v1&format=pdf").await;
    assert_eq!(bad.json()["code"], "bad_format");
    let view = api.get("/subjects/det/1/factsheet?template=max_catalog@v1&audience=developer").await;
    assert_eq!(view.status, StatusCode::OK);
    assert_eq!(view.json()["template"]["name"], "max_catalog");
    // The sheet keeps its base template; the view only narrows what is shown.
    let r = api.call(Method::PUT, "/templates/ethics_board/1", &[], fixtures::ETHICS_BOARD).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let dev = api.get("/subjects/det/1/factsheet?template=ethics_board@v1&audience=developer").await.json();
    let ids: Vec<&str> =
        dev["sections"].as_array().unwrap().iter().flat_map(|s| s["questions"].as_array().unwrap()).map(|q| q["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 6);
    assert!(!ids.contains(&"q5") && !ids.contains(&"q6"));
    assert_eq!(dev["template"]["name"], "ethics_board");
    let nope = api.get("/subjects/det/1/factsheet?template=max_catalog@v1&audience=martians").await;
    assert_eq!(nope.json()["code"], "unknown_audience");
    let missing = api.get("/subjects/det/1/factsheet").await;
    assert_eq!(missing.json()["code"], "template_required");
    let dsl = api.get("/templates/max_catalog/1?audience=developer").await;
    assert!(dsl.body.starts_with("template \"max_catalog@developer\" v1"), "{}", dsl.body);
}

#[tokio::test]
async fn gate_reports_blockers() {
    let api = Api::new();
    api.put_catalog().await;
    let gate = api.get("/subjects/det/1/gate/conception?template=max_catalog@v1").await.json();
    assert_eq!(gate["pass"], false);
    assert_eq!(gate["blocking"].as_array().unwrap().len(), 2);
    for q in ["q1", "q2"] {
        api.post_fact("business_owner", fact(q, json!({"kind": "text", "value": "x"}))).await;
    }
    let gate = api.get("/subjects/det/1/gate/conception?template=max_catalog@v1").await.json();
    assert_eq!(gate["pass"], true);
    let bad = api.get("/subjects/det/1/gate/retirement?template=max_catalog@v1").await;
    assert_eq!(bad.json()["code"], "bad_stage");
}

#[tokio::test]
async fn evaluation_round_trip() {
    let api = Api::new();
    api.put_catalog().await;
    let draft = json!({
        "kind": "content_eval",
        "template": "max_catalog@v1",
        "subject": {"id": "ghost", "version": "1"},
        "audience": null,
        "evaluator": {"name": "e1", "role": "data_scientist"},
    });
    let r = api.post("/evaluations/sessions", draft.clone()).await;
    assert_eq!(r.json()["code"], "unknown_subject");
    api.post_fact("business_owner", fact("q1", json!({"kind": "text", "value": "x"}))).await;
    let mut draft = draft;
    draft["subject"] = json!({"id": "det", "version": "1"});
    let r = api.post("/evaluations/sessions", draft).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.body);
    let id = r.json()["id"].as_str().unwrap().to_string();

    let response = json!({"item": 1, "target": "q9", "flags": ["extraneous"], "note": "not needed"});
    let r = api.post(&format!("/evaluations/sessions/{id}/responses"), response).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let order: Vec<String> = ["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8", "q10", "q9"].map(String::from).to_vec();
    let r = api.post(&format!("/evaluations/sessions/{id}/ranking"), json!({"order": order[..9]})).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "invalid_ranking");
    let r = api.post(&format!("/evaluations/sessions/{id}/ranking"), json!({"order": order})).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);

    let report = api.get("/evaluations/report?template=max_catalog@v1").await.json();
    assert_eq!(report["suggestions"][0]["action"], "remove");
    assert_eq!(report["suggestions"][0]["target"], "q9");
    let text = api.get("/evaluations/report?template=max_catalog@v1&format=text").await;
    assert!(text.content_type.starts_with("text/plain"));
    assert_eq!(api.get("/evaluations/sessions").await.json().as_array().unwrap().len(), 1);
    assert_eq!(api.get("/evaluations/sessions/eval-9999").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn banks_and_unknown_routes() {
    let api = Api::new();
    let banks = api.get("/banks").await.json();
    assert_eq!(banks.as_array().unwrap().len(), 6);
    let bank = api.get("/banks/consumer_interview").await.json();
    assert_eq!(bank["items"].as_array().unwrap().len(), 15);
    assert_eq!(api.get("/banks/nope").await.status, StatusCode::NOT_FOUND);
    let r = api.get("/nowhere").await;
    assert_eq!((r.status, r.json()["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));
    let r = api.call(Method::DELETE, "/banks", &[], Body::empty()).await;
    assert_eq!(r.status, StatusCode::METHOD_NOT_ALLOWED);
    assert_eq!(r.json()["code"], "method_not_allowed");
}
