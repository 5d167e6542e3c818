//! REST interface used by the review UI.
//!
//! Projects and sessions are JSON documents in a [`ProjectStore`]. Work that
//! touches the disk or the reconciliation provider runs on the blocking
//! pool; mutations of one session are serialized through a per-session lock.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use typematch_core::labeling::{suggest_labels, LabelReport, DEFAULT_TOP_M, DEFAULT_Z};
use typematch_core::matchers::{ColumnTypeProfile, MatchConfig};
use typematch_core::merge::{aggregate, merge_tables, AggregateFn, AggregationSpec, Provenance, Series};
use typematch_core::reconcile::Reconciler;
use typematch_core::store::{ProjectDoc, ProjectStore};
use typematch_core::{load_table, run_match, ColumnKind, Error, Result};

use crate::session::{self, Decision, SessionDoc};

const MAX_UPLOAD: usize = 64 * 1024 * 1024;

pub struct AppState {
    store: ProjectStore,
    reconciler: Option<Arc<Reconciler>>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(store: ProjectStore, reconciler: Option<Arc<Reconciler>>) -> Arc<Self> {
        Arc::new(AppState { store, reconciler, locks: Mutex::new(HashMap::new()) })
    }

    fn session_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks.lock().unwrap().entry(id.to_string()).or_default().clone()
    }

    fn reconciler(&self) -> Result<&Reconciler> {
        self.reconciler
            .as_deref()
            .ok_or_else(|| Error::Usage("the service runs without a reconciliation provider".into()))
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            e if e.is_usage() => StatusCode::BAD_REQUEST,
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            e if e.is_provider() => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::warn!("{status}: {}", self.0);
        }
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(Error::Io(std::io::Error::other(e.to_string()))))
        .map_err(ApiError)
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| Error::Usage(format!("invalid request body: {e}")))
}

fn query<T>(q: std::result::Result<Query<T>, QueryRejection>) -> Result<T> {
    q.map(|Query(t)| t).map_err(|e| Error::Usage(e.body_text()))
}

#[derive(Deserialize)]
struct UploadParams {
    name: Option<String>,
    has_header: Option<bool>,
}

#[derive(Serialize)]
struct ProjectView {
    id: String,
    #[serde(flatten)]
    doc: ProjectDoc,
}

#[derive(Serialize)]
struct ProjectSummary {
    id: String,
    name: String,
    rows: usize,
    headers: Vec<Option<String>>,
    kinds: Vec<ColumnKind>,
}

async fn create_project(
    State(state): State<Arc<AppState>>,
    params: std::result::Result<Query<UploadParams>, QueryRejection>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ProjectSummary>)> {
    let params = query(params)?;
    let summary = blocking(move || {
        let name = params.name.unwrap_or_else(|| "project".into());
        let table = load_table(&body, params.has_header.unwrap_or(true), &name)?;
        let id = state.store.save_project(&table)?;
        Ok(ProjectSummary { id, name, rows: table.row_count(), headers: table.headers(), kinds: table.kinds() })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_project(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ProjectView>> {
    let doc = blocking(move || {
        let doc: ProjectDoc = state.store.get("projects", &id)?;
        Ok(ProjectView { id, doc })
    })
    .await?;
    Ok(Json(doc))
}

async fn project_csv(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let csv = blocking(move || state.store.load_project(&id)?.to_csv()).await?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

#[derive(Deserialize)]
struct AggregateParams {
    x: usize,
    y: usize,
    #[serde(rename = "fn")]
    func: AggregateFn,
}

async fn project_aggregate(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: std::result::Result<Query<AggregateParams>, QueryRejection>,
) -> ApiResult<Json<Series>> {
    let p = query(params)?;
    let series = blocking(move || {
        let table = state.store.load_project(&id)?;
        aggregate(&table, &AggregationSpec { x_column: p.x, y_column: p.y, func: p.func })
    })
    .await?;
    Ok(Json(Series { series }))
}

#[derive(Deserialize)]
struct LabelParams {
    column: usize,
    top: Option<usize>,
    z: Option<f64>,
}

async fn project_labels(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: std::result::Result<Query<LabelParams>, QueryRejection>,
) -> ApiResult<Json<LabelReport>> {
    let p = query(params)?;
    let report = blocking(move || {
        let table = state.store.load_project(&id)?;
        let column =
            table.column(p.column).ok_or_else(|| Error::Usage(format!("column {} does not exist", p.column)))?;
        let reconciler = state.reconciler()?;
        let annotation = reconciler.annotate_column(column)?;
        reconciler.persist_cache()?;
        let profile = ColumnTypeProfile::from_annotation(&annotation);
        let suggestions = suggest_labels(&profile, p.z.unwrap_or(DEFAULT_Z), p.top.unwrap_or(DEFAULT_TOP_M))?;
        Ok(LabelReport::new(p.column, &suggestions))
    })
    .await?;
    Ok(Json(report))
}

#[derive(Deserialize)]
struct NewSession {
    source: String,
    target: String,
    #[serde(default)]
    config: MatchConfig,
}

fn session_json(doc: &SessionDoc) -> Response {
    Json(doc.view()).into_response()
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Response)> {
    let req: NewSession = parse_body(&body)?;
    let doc = blocking(move || {
        let source = state.store.load_project(&req.source)?;
        let target = state.store.load_project(&req.target)?;
        let reconciler = if req.config.needs_types() { Some(state.reconciler()?) } else { None };
        let report = run_match(&source, &target, reconciler, &req.config)?;
        if let Some(r) = reconciler {
            r.persist_cache()?;
        }
        let doc = SessionDoc::new(
            ProjectStore::new_id(),
            (req.source, source.width()),
            (req.target, target.width()),
            req.config,
            report,
        );
        state.store.put(session::COLLECTION, &doc.id, &doc)?;
        Ok(doc)
    })
    .await?;
    Ok((StatusCode::CREATED, session_json(&doc)))
}

async fn load_session(state: Arc<AppState>, id: String) -> ApiResult<SessionDoc> {
    blocking(move || state.store.get(session::COLLECTION, &id)).await
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(session_json(&load_session(state, id).await?))
}

/// The match report in exactly the bytes `typematch match` writes.
async fn get_matches(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let doc = load_session(state, id).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc.matches.to_json()).into_response())
}

#[derive(Deserialize)]
struct DecisionRequest {
    pair: [usize; 2],
    decision: Decision,
}

/// Runs `mutate` on the stored session while holding its lock, then saves it.
async fn update_session<T, F>(state: Arc<AppState>, id: String, mutate: F) -> ApiResult<(SessionDoc, T)>
where
    F: FnOnce(&AppState, &mut SessionDoc) -> Result<T> + Send + 'static,
    T: Send + 'static,
{
    let lock = state.session_lock(&id);
    let _guard = lock.lock().await;
    blocking(move || {
        let mut doc: SessionDoc = state.store.get(session::COLLECTION, &id)?;
        let out = mutate(&state, &mut doc)?;
        state.store.put(session::COLLECTION, &id, &doc)?;
        Ok((doc, out))
    })
    .await
}

async fn post_decision(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: DecisionRequest = parse_body(&body)?;
    let (doc, ()) = update_session(state, id, move |_, doc| doc.record(req.pair, req.decision)).await?;
    Ok(session_json(&doc))
}

#[derive(Deserialize)]
#[serde(default)]
struct MergeRequest {
    include_unmatched: bool,
}

impl Default for MergeRequest {
    fn default() -> Self {
        MergeRequest { include_unmatched: true }
    }
}

#[derive(Serialize)]
struct MergeResponse {
    project: String,
    rows: usize,
    headers: Vec<Option<String>>,
    provenance: Vec<Provenance>,
}

async fn merge_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<MergeResponse>)> {
    let req: MergeRequest = if body.is_empty() { MergeRequest::default() } else { parse_body(&body)? };
    let (_, merged) = update_session(state, id, move |state, doc| {
        let pairs = doc.accepted_pairs();
        if pairs.is_empty() {
            return Err(Error::Usage("accept at least one pair before merging".into()));
        }
        let source = state.store.load_project(&doc.source)?;
        let target = state.store.load_project(&doc.target)?;
        let merged = merge_tables(&source, &target, &pairs, req.include_unmatched)?;
        let project = state.store.save_project(&merged.table)?;
        doc.merged = Some(project.clone());
        Ok(MergeResponse {
            project,
            rows: merged.table.row_count(),
            headers: merged.table.headers(),
            provenance: merged.provenance,
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(merged)))
}

async fn fallback() -> ApiError {
    ApiError(Error::NotFound("no such endpoint".into()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/projects", post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/csv", get(project_csv))
        .route("/projects/{id}/aggregate", get(project_aggregate))
        .route("/projects/{id}/labels", get(project_labels))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/matches", get(get_matches))
        .route("/sessions/{id}/decisions", post(post_decision))
        .route("/sessions/{id}/merge", post(merge_session))
        .fallback(fallback)
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Binds `host:port` and serves until the process is stopped.
pub fn serve(state: Arc<AppState>, host: &str, port: u16) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("typematch listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(state)).await?;
        Ok(())
    })
}
