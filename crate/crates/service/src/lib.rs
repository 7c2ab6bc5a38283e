//! HTTP facade over the fsforge library.
//!
//! Every endpoint is a thin wrapper: it decodes the request, calls the same
//! library function the CLI uses, and encodes the result. JSON bodies are
//! pretty-printed with a trailing newline; renders are returned verbatim.
//!
//! **The `X-Role` header is trusted.** There is no authentication: whoever can
//! reach the port can write facts as any role. Put the service behind
//! something that authenticates callers before exposing it.

mod error;
mod handlers;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::routing::{get, post, put};
use axum::Router;

pub use error::{ApiDiagnostic, ApiError};
pub use handlers::{FactInput, RankingInput, TemplateAccepted};

use fsforge::factstore::{CatalogError, Store, StoreError, TemplateCatalog};
use fsforge::methodology::{EvalStore, EvalStoreError};

/// Everything a request handler can reach.
pub struct AppState {
    pub store: Store,
    pub catalog: TemplateCatalog,
    pub evaluations: EvalStore,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Evaluations(#[from] EvalStoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AppState {
    /// Opens the store directory with its template catalog and evaluation sessions.
    pub fn open(dir: impl AsRef<Path>) -> Result<AppState, ServeError> {
        let dir = dir.as_ref();
        Ok(AppState {
            store: Store::open(dir)?,
            catalog: TemplateCatalog::open(dir)?,
            evaluations: EvalStore::open(dir)?,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    use handlers::*;
    Router::new()
        .route("/templates", get(list_templates))
        .route("/templates/{name}/{version}", put(put_template).get(get_template))
        .route("/subjects", get(list_subjects))
        .route("/subjects/{id}/{version}/facts", post(post_fact))
        .route("/subjects/{id}/{version}/factsheet", get(get_factsheet))
        .route("/subjects/{id}/{version}/history/{question}", get(get_history))
        .route("/subjects/{id}/{version}/gate/{stage}", get(get_gate))
        .route("/evaluations/sessions", post(post_session).get(list_sessions))
        .route("/evaluations/sessions/{id}", get(get_session))
        .route("/evaluations/sessions/{id}/responses", post(post_response))
        .route("/evaluations/sessions/{id}/ranking", post(post_ranking))
        .route("/evaluations/report", get(get_report))
        .route("/banks", get(list_banks))
        .route("/banks/{kind}", get(get_bank))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

/// Serves until `shutdown` resolves, then finishes in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Opens `store`, binds `addr` and serves until Ctrl-C.
pub fn run(store: PathBuf, addr: &str) -> Result<(), ServeError> {
    let state = Arc::new(AppState::open(&store)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener =
            tokio::net::TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr: addr.to_string(), source })?;
        let local: SocketAddr = listener.local_addr()?;
        eprintln!("fsforge: serving {} on http://{local}", store.display());
        if state.store.is_read_only() {
            eprintln!("fsforge: store is read-only: {}", state.store.corruption()[0]);
        }
        serve(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
            eprintln!("fsforge: shutting down");
        })
        .await?;
        Ok(())
    })
}
