use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::{ComparisonRequest, ReviewStore, ServiceConfig, ServiceError, StoreOutcome};
use crate::compare::{CompareError, FilterMode};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            ServiceError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not-found"),
            ServiceError::Compare(CompareError::InvalidMode) => (StatusCode::BAD_REQUEST, "invalid-mode"),
            ServiceError::Compare(CompareError::Contract(_)) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
            ServiceError::Config(_) => (StatusCode::INTERNAL_SERVER_ERROR, "config"),
            ServiceError::Credentials(_) => (StatusCode::BAD_GATEWAY, "credentials"),
            ServiceError::Transport(_) | ServiceError::Remote { .. } => (StatusCode::BAD_GATEWAY, "transport"),
            ServiceError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
        };
        if status.is_server_error() {
            log::error!("{self}");
        }
        (status, Json(serde_json::json!({ "error": kind, "message": self.to_string() }))).into_response()
    }
}

type Shared = Arc<ReviewStore>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Transport(format!("worker failed: {e}")))?
}

async fn post_structure(State(store): State<Shared>, body: Bytes) -> Result<Response, ServiceError> {
    let (cref, outcome) = blocking(move || store.store_structure(&body)).await?;
    let status = if outcome == StoreOutcome::Created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(cref)).into_response())
}

#[derive(Serialize)]
struct RejectionBody {
    index: usize,
    reason: String,
}

#[derive(Serialize)]
struct IngestBody {
    accepted: usize,
    inserted: usize,
    rejected: Vec<RejectionBody>,
}

async fn post_spans(State(store): State<Shared>, body: Bytes) -> Result<Json<IngestBody>, ServiceError> {
    let o = blocking(move || store.ingest_spans(&body)).await?;
    Ok(Json(IngestBody {
        accepted: o.accepted,
        inserted: o.inserted.len(),
        rejected: o.rejected.into_iter().map(|r| RejectionBody { index: r.index, reason: r.reason }).collect(),
    }))
}

async fn applications(State(store): State<Shared>) -> Json<Vec<String>> {
    Json(store.applications())
}

async fn commits(State(store): State<Shared>, Path(app): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(store.commits(&app)?).into_response())
}

async fn windows(State(store): State<Shared>, Path((app, commit)): Path<(String, String)>) -> Json<Vec<u64>> {
    Json(store.windows(&app, &commit))
}

async fn latest(State(store): State<Shared>, Path(app): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(store.latest_commit(&app)?).into_response())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ComparisonQuery {
    base: String,
    target: String,
    base_window: Option<u64>,
    target_window: Option<u64>,
    #[serde(rename = "static")]
    include_static: Option<bool>,
    #[serde(rename = "dynamic")]
    include_dynamic: Option<bool>,
    diff_only: Option<bool>,
}

async fn comparison(
    State(store): State<Shared>,
    Path(app): Path<String>,
    Query(q): Query<ComparisonQuery>,
) -> Result<Response, ServiceError> {
    let d = FilterMode::default();
    let req = ComparisonRequest {
        base: q.base,
        target: q.target,
        base_window: q.base_window,
        target_window: q.target_window,
        filter: FilterMode {
            include_static: q.include_static.unwrap_or(d.include_static),
            include_dynamic: q.include_dynamic.unwrap_or(d.include_dynamic),
            diff_only: q.diff_only.unwrap_or(d.diff_only),
        },
    };
    let resp = blocking(move || store.get_comparison(&app, &req)).await?;
    Ok(Json(resp).into_response())
}

pub fn router(store: Arc<ReviewStore>) -> Router {
    Router::new()
        .route("/api/v1/structure", post(post_structure))
        .route("/api/v1/spans", post(post_spans))
        .route("/api/v1/applications", get(applications))
        .route("/api/v1/applications/:app/commits", get(commits))
        .route("/api/v1/applications/:app/commits/:commit/windows", get(windows))
        .route("/api/v1/applications/:app/comparison", get(comparison))
        .route("/api/v1/applications/:app/latest", get(latest))
        .with_state(store)
}

/// Opens the store and serves the API until the process ends.
pub async fn serve(config: &ServiceConfig) -> Result<(), ServiceError> {
    let dir = config.data_dir.clone();
    let store = blocking(move || ReviewStore::open(dir)).await?;
    let listener =
        tokio::net::TcpListener::bind(config.listen_addr).await.map_err(|e| ServiceError::Config(format!("bind {}: {e}", config.listen_addr)))?;
    log::info!("listening on {}", config.listen_addr);
    axum::serve(listener, router(Arc::new(store))).await.map_err(|e| ServiceError::Transport(e.to_string()))
}
