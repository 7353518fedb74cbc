//! HTTP JSON API under `/api/v1`.

use super::{CheckKind, CreateSession, CryptoEntryInput, ServiceError, SessionStore};
use crate::mapping::Decision;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Error as returned to clients: `{code, message, detail}`.
pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest { .. } => StatusCode::BAD_REQUEST,
            ServiceError::Parse(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Precondition(_) => StatusCode::CONFLICT,
            ServiceError::Io { .. } | ServiceError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.0.body())).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

/// One lock per session: mutations on a session run one at a time.
#[derive(Clone)]
struct AppState {
    store: Arc<SessionStore>,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ServiceError> {
    let bytes: &[u8] = if bytes.is_empty() { b"{}" } else { bytes };
    serde_json::from_slice(bytes).map_err(|e| ServiceError::BadRequest {
        message: format!("invalid request body: {e}"),
        detail: json!({ "line": e.line(), "column": e.column() }),
    })
}

fn ok(value: Value) -> ApiResult {
    Ok(Json(value).into_response())
}

pub fn router(store: SessionStore) -> Router {
    let state = AppState {
        store: Arc::new(store),
        locks: Arc::default(),
    };
    let api = Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(show_session))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .route("/sessions/{id}/decisions", post(post_decision))
        .route("/sessions/{id}/mappings", post(post_mapping))
        .route("/sessions/{id}/iterate", post(post_iterate))
        .route("/sessions/{id}/checks/{kind}", post(post_check))
        .route("/sessions/{id}/violations", get(violations))
        .route("/sessions/{id}/crypto-list", get(crypto_list).put(put_crypto_list));
    Router::new()
        .nest("/api/v1", api)
        .fallback(|| async { ApiError(ServiceError::NotFound("route".into())) })
        .with_state(state)
}

pub async fn serve(store: SessionStore, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}

async fn list_sessions(State(s): State<AppState>) -> ApiResult {
    ok(json!({ "sessions": s.store.list()? }))
}

async fn create_session(State(s): State<AppState>, raw: Bytes) -> ApiResult {
    let req: CreateSession = body(&raw)?;
    let session = s.store.create(&req)?;
    let value = json!({ "session": session.meta, "suggestions": session.suggestions() });
    Ok((StatusCode::CREATED, Json(value)).into_response())
}

async fn show_session(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = s.store.open(&id)?;
    ok(json!({
        "session": session.meta,
        "iteration": session.state.iteration,
        "models": session.ws.models.iter().map(|m| &m.name).collect::<Vec<_>>(),
        "entries": session.state.entries.len(),
    }))
}

async fn suggestions(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = s.store.open(&id)?;
    ok(json!({ "iteration": session.state.iteration, "suggestions": session.suggestions() }))
}

#[derive(Deserialize)]
struct DecisionBody {
    entry: String,
    decision: String,
}

async fn post_decision(State(s): State<AppState>, Path(id): Path<String>, raw: Bytes) -> ApiResult {
    let req: DecisionBody = body(&raw)?;
    let decision: Decision = req.decision.parse().map_err(ServiceError::bad_request)?;
    let lock = s.lock_for(&id);
    let _guard = lock.lock().await;
    let suggestions = s.store.update(&id, |session| session.decide(&req.entry, decision))?;
    ok(json!({ "suggestions": suggestions }))
}

#[derive(Deserialize)]
struct MappingBody {
    dfd: String,
    pm: String,
}

async fn post_mapping(State(s): State<AppState>, Path(id): Path<String>, raw: Bytes) -> ApiResult {
    let req: MappingBody = body(&raw)?;
    let lock = s.lock_for(&id);
    let _guard = lock.lock().await;
    let (entry, suggestions) = s.store.update(&id, |session| {
        let entry = session.map(&req.dfd, &req.pm)?;
        Ok((entry, session.suggestions()))
    })?;
    Ok((StatusCode::CREATED, Json(json!({ "entry": entry, "suggestions": suggestions }))).into_response())
}

async fn post_iterate(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let lock = s.lock_for(&id);
    let _guard = lock.lock().await;
    let (iteration, suggestions) = s.store.update(&id, |session| {
        let v = session.iterate();
        Ok((session.state.iteration, v))
    })?;
    ok(json!({ "iteration": iteration, "suggestions": suggestions }))
}

#[derive(Deserialize)]
struct CheckQuery {
    mode: Option<String>,
}

async fn post_check(
    State(s): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(q): Query<CheckQuery>,
) -> ApiResult {
    let kind = CheckKind::parse(&kind, q.mode.as_deref()).map_err(ServiceError::bad_request)?;
    let lock = s.lock_for(&id);
    let _guard = lock.lock().await;
    let report = s.store.update(&id, |session| session.check(kind))?;
    ok(serde_json::to_value(report).expect("report serializes"))
}

async fn violations(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = s.store.open(&id)?;
    ok(json!({ "violations": session.violations() }))
}

#[derive(Deserialize)]
struct CryptoBody {
    #[serde(default)]
    entries: Vec<CryptoEntryInput>,
}

async fn crypto_list(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = s.store.open(&id)?;
    ok(json!({ "base": session.crypto.base.entries, "added": session.crypto.added.entries, "entries": session.crypto_list().entries }))
}

async fn put_crypto_list(State(s): State<AppState>, Path(id): Path<String>, raw: Bytes) -> ApiResult {
    let req: CryptoBody = body(&raw)?;
    let lock = s.lock_for(&id);
    let _guard = lock.lock().await;
    let list = s.store.update(&id, |session| session.set_crypto_entries(&req.entries))?;
    ok(json!({ "entries": list.entries }))
}
