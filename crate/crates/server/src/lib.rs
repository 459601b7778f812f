//! HTTP/JSON API over the selection pipeline.
//!
//! Catalogs are content-addressed by fingerprint. Each session sits behind its
//! own writer lock; every successful advance is appended to the session log
//! on disk before the response is sent, and [`AppState::open`] replays those
//! logs on startup.

use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgsel_core::catalog::{parse_catalog_json, validate_catalog, Catalog, CatalogError, Violation};
use kgsel_core::kvimap::{coverage, kv_satisfied, pragmatic_candidates, CoverageReport, PragmaticCandidate};
use kgsel_core::pipeline::{
    evaluate, store::SessionDir, Decision, PipelineError, Session, SessionStatus, StageKind,
    StageRecord,
};
use kgsel_core::pruner::{cluster_enablers, ConfigOverrides, PruneConfig, PruneOutcome};
use kgsel_core::reports::{export, ExportFormat, ExportTarget};
use kgsel_core::scoring::{kpi_histogram, Histogram};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

pub const OPENAPI: &str = include_str!("openapi.json");

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    pub ui_dir: Option<PathBuf>,
}

struct SessionEntry {
    session: Session,
    dir: SessionDir,
}

pub struct AppState {
    data_dir: PathBuf,
    catalogs: RwLock<BTreeMap<String, Arc<Catalog>>>,
    sessions: RwLock<BTreeMap<String, Arc<RwLock<SessionEntry>>>>,
}

impl AppState {
    /// Loads stored catalogs and replays every stored session.
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self, String> {
        let data_dir = data_dir.into();
        let cat_dir = data_dir.join("catalogs");
        let ses_dir = data_dir.join("sessions");
        for d in [&cat_dir, &ses_dir] {
            fs::create_dir_all(d).map_err(|e| format!("{}: {e}", d.display()))?;
        }
        let mut catalogs = BTreeMap::new();
        for entry in read_dir(&cat_dir)? {
            let bytes = fs::read(&entry).map_err(|e| format!("{}: {e}", entry.display()))?;
            let c = kgsel_core::catalog::load_catalog_json(&bytes)
                .map_err(|e| format!("{}: {e}", entry.display()))?;
            catalogs.insert(c.fingerprint(), Arc::new(c));
        }
        let mut sessions = BTreeMap::new();
        for entry in read_dir(&ses_dir)? {
            if !entry.is_dir() {
                continue;
            }
            let (dir, session) =
                SessionDir::load(&entry).map_err(|e| format!("{}: {e}", entry.display()))?;
            for (v, c) in session.catalogs() {
                catalogs.entry(v.clone()).or_insert_with(|| Arc::clone(c));
            }
            sessions.insert(
                session.id.clone(),
                Arc::new(RwLock::new(SessionEntry { session, dir })),
            );
        }
        Ok(AppState {
            data_dir,
            catalogs: RwLock::new(catalogs),
            sessions: RwLock::new(sessions),
        })
    }

    async fn session(&self, id: &str) -> Result<Arc<RwLock<SessionEntry>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("UnknownSession", format!("no session '{id}'")))
    }
}

fn read_dir(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<Violation>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            message: message.into(),
            violations: None,
        }
    }

    fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", message)
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::IllegalTransition { .. } | PipelineError::SessionClosed(_) => {
                StatusCode::CONFLICT
            }
            PipelineError::InvalidCatalog(_) | PipelineError::InvalidConfig(_) | PipelineError::Kvi(_) => {
                StatusCode::BAD_REQUEST
            }
            PipelineError::ReplayMismatch { .. } | PipelineError::Log(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let mut err = ApiError::new(status, e.code(), e.to_string());
        if let PipelineError::InvalidCatalog(r) = e {
            err.violations = Some(r.violations);
        }
        err
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SummaryCounts {
    pub nodes: usize,
    pub edges: usize,
    pub retained: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Links {
    pub graph: String,
    pub histogram: String,
    pub coverage: String,
    pub candidates: String,
    pub export: String,
}

/// What clients see of a session.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiSessionView {
    pub id: String,
    pub status: SessionStatus,
    pub stage: StageKind,
    pub catalog_version: String,
    pub config: PruneConfig,
    pub pragmatic_iteration: u32,
    pub restart_index: usize,
    pub summary: SummaryCounts,
    pub snapshot: Option<String>,
    pub stages: Vec<StageRecord>,
    pub links: Links,
}

fn view(s: &Session) -> ApiSessionView {
    let last = s
        .stages
        .iter()
        .rev()
        .find(|r| r.snapshot.is_some())
        .expect("sessions hold a full graph");
    let base = format!("/sessions/{}", s.id);
    ApiSessionView {
        id: s.id.clone(),
        status: s.status,
        stage: s.current_stage(),
        catalog_version: s.catalog_version.clone(),
        config: s.config.clone(),
        pragmatic_iteration: s.pragmatic_iteration,
        restart_index: s.restart_index,
        summary: SummaryCounts {
            nodes: last.summary.nodes,
            edges: last.summary.edges,
            retained: last.summary.retained,
            removed: last.summary.removed,
        },
        snapshot: last.snapshot.clone(),
        stages: s.stages.clone(),
        links: Links {
            graph: format!("{base}/graph"),
            histogram: format!("{base}/histogram"),
            coverage: format!("{base}/coverage"),
            candidates: format!("{base}/candidates"),
            export: format!("{base}/export?fmt=selection-csv"),
        },
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/openapi.json", get(openapi))
        .route("/health", get(|| async { Json(serde_json::json!({"status": "ok"})) }))
        .route("/catalogs", post(upload_catalog).get(list_catalogs))
        .route("/catalogs/{id}", get(get_catalog))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/histogram", get(histogram))
        .route("/sessions/{id}/coverage", get(get_coverage))
        .route("/sessions/{id}/candidates", get(candidates))
        .route("/sessions/{id}/whatif", post(whatif))
        .route("/sessions/{id}/export", get(export_session))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until the process ends. The bound address is printed
/// first so callers that asked for port 0 can find the server.
pub async fn serve(cfg: ServerConfig) -> Result<(), String> {
    let state = Arc::new(AppState::open(&cfg.data_dir)?);
    let listener = tokio::net::TcpListener::bind(cfg.addr)
        .await
        .map_err(|e| format!("bind {}: {e}", cfg.addr))?;
    let local = listener.local_addr().map_err(|e| e.to_string())?;
    println!("listening on http://{local}");
    axum::serve(listener, router(state, cfg.ui_dir.as_deref()))
        .await
        .map_err(|e| e.to_string())
}

/// Starts a server on an already chosen address in the background and
/// returns the bound address. Mostly useful in tests.
pub async fn spawn(
    data_dir: impl Into<PathBuf>,
    addr: SocketAddr,
) -> Result<(SocketAddr, tokio::task::JoinHandle<()>), String> {
    let state = Arc::new(AppState::open(data_dir)?);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| format!("bind {addr}: {e}"))?;
    let local = listener.local_addr().map_err(|e| e.to_string())?;
    let handle = tokio::spawn(async move {
        let _ = axum::serve(listener, router(state, None)).await;
    });
    Ok((local, handle))
}

async fn openapi() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], OPENAPI)
}

#[derive(Serialize)]
struct CatalogInfo {
    id: String,
    use_case_name: String,
    enablers: usize,
    violations: usize,
}

fn info(id: &str, c: &Catalog) -> CatalogInfo {
    CatalogInfo {
        id: id.to_owned(),
        use_case_name: c.use_case_name.clone(),
        enablers: c.enablers.len(),
        violations: 0,
    }
}

async fn upload_catalog(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let c = parse_catalog_json(&body).map_err(|e| {
        let mut err = ApiError::bad_request(e.code(), e.to_string());
        if let CatalogError::Schema { violations, .. } = e {
            err.violations = Some(violations);
        }
        err
    })?;
    let report = validate_catalog(&c);
    if !report.is_valid() {
        let mut err = ApiError::bad_request(
            "SchemaError",
            format!("catalog has {} violation(s)", report.violations.len()),
        );
        err.violations = Some(report.violations);
        return Err(err);
    }
    let id = c.fingerprint();
    let mut catalogs = st.catalogs.write().await;
    let created = !catalogs.contains_key(&id);
    if created {
        let path = st.data_dir.join("catalogs").join(format!("{id}.json"));
        fs::write(&path, c.to_json()).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    let body = Json(info(&id, &c));
    catalogs.insert(id, Arc::new(c));
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, body).into_response())
}

async fn list_catalogs(State(st): State<Arc<AppState>>) -> Json<Vec<CatalogInfo>> {
    let catalogs = st.catalogs.read().await;
    Json(catalogs.iter().map(|(id, c)| info(id, c)).collect())
}

async fn get_catalog(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Catalog>> {
    let catalogs = st.catalogs.read().await;
    catalogs
        .get(&id)
        .map(|c| Json((**c).clone()))
        .ok_or_else(|| ApiError::not_found("UnknownCatalog", format!("no catalog '{id}'")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    catalog_id: String,
    #[serde(default)]
    config: PruneConfig,
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> ApiResult<Response> {
    let catalog = st
        .catalogs
        .read()
        .await
        .get(&req.catalog_id)
        .cloned()
        .ok_or_else(|| {
            ApiError::not_found("UnknownCatalog", format!("no catalog '{}'", req.catalog_id))
        })?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id.clone(), catalog, req.config)?;
    let dir = SessionDir::create(st.data_dir.join("sessions").join(&id), &session)?;
    let v = view(&session);
    st.sessions
        .write()
        .await
        .insert(id, Arc::new(RwLock::new(SessionEntry { session, dir })));
    Ok((StatusCode::CREATED, Json(v)).into_response())
}

async fn list_sessions(State(st): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(st.sessions.read().await.keys().cloned().collect())
}

async fn get_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<ApiSessionView>> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    Ok(Json(view(&e.session)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvanceRequest {
    decision: Decision,
}

async fn advance(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<AdvanceRequest>,
) -> ApiResult<Json<ApiSessionView>> {
    let entry = st.session(&id).await?;
    let mut e = entry.write().await;
    let mut next = e.session.clone();
    next.advance(req.decision)?;
    e.dir.sync(&next)?;
    e.session = next;
    Ok(Json(view(&e.session)))
}

#[derive(Deserialize)]
struct StageQuery {
    stage: Option<usize>,
}

async fn graph(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<StageQuery>,
) -> ApiResult<Response> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    let snap = e
        .session
        .stage_snapshot(q.stage)
        .ok_or_else(|| ApiError::not_found("UnknownStage", "stage has no snapshot"))?;
    let body = export(ExportTarget::Graph(&snap.graph), ExportFormat::GraphJson)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

#[derive(Serialize)]
struct HistogramBody {
    stage: usize,
    total: usize,
    buckets: Vec<Bucket>,
}

#[derive(Serialize)]
struct Bucket {
    score: i64,
    count: usize,
}

fn histogram_body(stage: usize, h: &Histogram) -> HistogramBody {
    HistogramBody {
        stage,
        total: h.total(),
        buckets: h
            .buckets
            .iter()
            .map(|(score, count)| Bucket {
                score: *score,
                count: *count,
            })
            .collect(),
    }
}

async fn histogram(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<StageQuery>,
) -> ApiResult<Json<HistogramBody>> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    let s = &e.session;
    let seq = match q.stage {
        Some(i) => i,
        None => s
            .stages
            .iter()
            .rev()
            .find(|r| r.snapshot.is_some())
            .map(|r| r.seq)
            .unwrap_or(0),
    };
    let snap = s
        .stage_snapshot(Some(seq))
        .ok_or_else(|| ApiError::not_found("UnknownStage", format!("stage {seq} has no snapshot")))?;
    Ok(Json(histogram_body(seq, &kpi_histogram(&snap.graph))))
}

async fn get_coverage(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<CoverageReport>> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    Ok(Json(e.session.current_coverage()))
}

async fn candidates(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Vec<PragmaticCandidate>>> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    let s = &e.session;
    if s.current_stage() == StageKind::CoverageAnalyzed {
        return Ok(Json(s.candidates().to_vec()));
    }
    let report = s.current_coverage();
    if kv_satisfied(&report) {
        return Ok(Json(Vec::new()));
    }
    let list = pragmatic_candidates(s.full_graph(), s.current_outcome(), &report, s.catalog())
        .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    Ok(Json(list))
}

#[derive(Serialize)]
struct WhatIf {
    config: PruneConfig,
    outcome: PruneOutcome,
    coverage: CoverageReport,
}

async fn whatif(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(overrides): Json<ConfigOverrides>,
) -> ApiResult<Json<WhatIf>> {
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    let s = &e.session;
    let cfg = overrides.apply(&s.config);
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(ApiError::bad_request("InvalidConfig", problems.join("; ")));
    }
    let outcome = evaluate(s.full_graph(), s.catalog(), &cfg);
    let cov = coverage(&outcome, &cluster_enablers(&outcome.graph, s.catalog()), s.catalog(), &cfg);
    Ok(Json(WhatIf {
        config: cfg,
        outcome,
        coverage: cov,
    }))
}

#[derive(Deserialize)]
struct ExportQuery {
    fmt: String,
}

async fn export_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    let fmt: ExportFormat = q
        .fmt
        .parse()
        .map_err(|m: String| ApiError::bad_request("UnknownFormat", m))?;
    let entry = st.session(&id).await?;
    let e = entry.read().await;
    let body = export(ExportTarget::Session(&e.session), fmt)
        .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, fmt.media_type())], body).into_response())
}
