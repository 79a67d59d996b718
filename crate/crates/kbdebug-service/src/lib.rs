//! HTTP JSON service for debugging sessions.

pub mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kbdebug::api::{
    AnswerRequest, BatchRequest, CreateSessionRequest, DiagnosesView, ErrorBody, SessionDetail, SessionRecord, SessionView, SolveRequest,
};
use kbdebug::session::{abort, submit_answer, SessionError};
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;

pub use store::Store;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError { status, message: message.into() }
    }

    fn not_found(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, format!("no session '{id}'"))
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let status = match e {
            SessionError::NoPendingQuery => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<io::Error> for ApiError {
    fn from(e: io::Error) -> ApiError {
        tracing::error!("storage: {e}");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("storage error: {e}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    store: Store,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(store: Store) -> AppState {
        AppState { store, locks: Arc::default() }
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks.lock().unwrap().entry(id.to_string()).or_default().clone()
    }
}

/// Own body parsing so malformed JSON gets the same error shape, with
/// line and column.
fn parse<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {e}")))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req: CreateSessionRequest = parse(&body)?;
    let snapshot = blocking(move || req.start()).await??;
    let session_id = uuid::Uuid::new_v4().to_string();
    let stamp = now();
    let record = SessionRecord { session_id: session_id.clone(), snapshot, created: stamp.clone(), updated: stamp };
    let store = app.store.clone();
    let record = blocking(move || store.save(&record).map(|_| record)).await??;
    tracing::info!(session = %session_id, status = ?record.snapshot.status, "created");
    Ok((StatusCode::CREATED, Json(SessionView::new(&session_id, &record.snapshot))))
}

async fn load(app: &AppState, id: &str) -> ApiResult<SessionRecord> {
    let store = app.store.clone();
    let key = id.to_string();
    blocking(move || store.load(&key)).await??.ok_or_else(|| ApiError::not_found(id))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionDetail>> {
    let record = load(&app, &id).await?;
    let view = SessionView::new(&id, &record.snapshot);
    Ok(Json(SessionDetail { record, view }))
}

async fn get_diagnoses(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<DiagnosesView>> {
    let record = load(&app, &id).await?;
    Ok(Json(DiagnosesView { session_id: id, status: record.snapshot.status, diagnoses: record.snapshot.diagnoses() }))
}

async fn answer(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<SessionView>> {
    let lock = app.lock_for(&id);
    let _guard = lock.lock().await;
    let mut record = load(&app, &id).await?;
    let req: AnswerRequest = parse(&body)?;
    let mut snapshot = record.snapshot;
    record.snapshot = blocking(move || submit_answer(&mut snapshot, req.answer).map(|_| snapshot)).await??;
    record.updated = now();
    let store = app.store.clone();
    let record = blocking(move || store.save(&record).map(|_| record)).await??;
    tracing::info!(session = %id, answer = ?req.answer, status = ?record.snapshot.status, "answered");
    Ok(Json(SessionView::new(&id, &record.snapshot)))
}

async fn abort_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let lock = app.lock_for(&id);
    let _guard = lock.lock().await;
    let mut record = load(&app, &id).await?;
    abort(&mut record.snapshot)?;
    record.updated = now();
    let store = app.store.clone();
    let record = blocking(move || store.save(&record).map(|_| record)).await??;
    tracing::info!(session = %id, "aborted");
    Ok(Json(SessionView::new(&id, &record.snapshot)))
}

async fn batch(body: Bytes) -> ApiResult<Response> {
    let req: BatchRequest = parse(&body)?;
    let report = blocking(move || req.run()).await??;
    Ok(Json(report).into_response())
}

async fn solve(body: Bytes) -> ApiResult<Response> {
    let req: SolveRequest = parse(&body)?;
    let result = blocking(move || req.run()).await??;
    Ok(Json(result).into_response())
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/abort", post(abort_session))
        .route("/sessions/{id}/diagnoses", get(get_diagnoses))
        .route("/debug/batch", post(batch))
        .route("/debug/solve", post(solve))
        .with_state(app)
}

pub async fn serve(listener: TcpListener, store: Store) -> io::Result<()> {
    axum::serve(listener, router(AppState::new(store))).await
}

/// Run a server on a loopback ephemeral port in a background thread and
/// return its address. The server lives as long as the process.
pub fn spawn_background(data_dir: impl Into<PathBuf>) -> io::Result<SocketAddr> {
    let store = Store::open(data_dir)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    let listener = runtime.block_on(TcpListener::bind(("127.0.0.1", 0)))?;
    let addr = listener.local_addr()?;
    std::thread::Builder::new().name("kbdebug-server".into()).spawn(move || {
        if let Err(e) = runtime.block_on(serve(listener, store)) {
            tracing::error!("embedded server stopped: {e}");
        }
    })?;
    Ok(addr)
}
