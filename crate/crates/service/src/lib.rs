//! HTTP front end for a geoden snapshot.
//!
//! | method | path                      | body / query              |
//! |--------|---------------------------|---------------------------|
//! | GET    | `/api/meta`               |                           |
//! | POST   | `/api/query/{kind}`       | [`QueryRequest`] JSON     |
//! | GET    | `/api/regions`            |                           |
//! | PUT    | `/api/regions`            | regions, `If-Match`       |
//! | GET    | `/api/suitability`        | `bbox=a,b,c,d&res=deg`    |
//! | POST   | `/api/admin/reload`       |                           |
//!
//! `kind` is one of `reports`, `centroids`, `trajectories`, `cooccurrence`
//! or `timeline`. Anything else falls through to the static directory when
//! one is configured.

pub mod error;
pub mod store;

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use geoden_core::analytics::GlyphSizes;
use geoden_core::grid::{classify_window, BBox};
use geoden_core::query::{execute, resolve_query, QueryKind, QueryRequest};
use geoden_core::{load_data_dir, Snapshot};
use serde::Deserialize;
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorBody};
pub use store::{RegionStore, StoreError, StoreView};

/// Shared server state. Queries clone the current snapshot handle and run
/// without holding any lock; reloads swap the handle.
#[derive(Debug)]
pub struct AppState {
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    data_dir: Option<PathBuf>,
    store: RegionStore,
    glyph_sizes: GlyphSizes,
}

impl AppState {
    pub fn new(snapshot: Option<Snapshot>, data_dir: Option<PathBuf>, store: RegionStore) -> Self {
        Self {
            snapshot: RwLock::new(snapshot.map(Arc::new)),
            data_dir,
            store,
            glyph_sizes: GlyphSizes::default(),
        }
    }

    pub fn snapshot(&self) -> Option<Arc<Snapshot>> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn require_snapshot(&self) -> Result<Arc<Snapshot>, ApiError> {
        self.snapshot().ok_or_else(ApiError::not_ready)
    }

    pub fn store(&self) -> &RegionStore {
        &self.store
    }

    pub fn replace_snapshot(&self, snapshot: Snapshot) {
        *self.snapshot.write().expect("snapshot lock") = Some(Arc::new(snapshot));
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/query/{kind}", post(query))
        .route("/api/regions", get(get_regions).put(put_regions))
        .route("/api/suitability", get(suitability))
        .route("/api/admin/reload", post(reload))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "", "no such endpoint")
        }),
    }
}

/// Runs the service on an already bound listener until the process ends.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

async fn meta(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let snap = state.require_snapshot()?;
    Ok(Json(snap.meta()).into_response())
}

async fn query(
    State(state): State<Arc<AppState>>,
    Path(kind): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let kind: QueryKind = kind
        .parse()
        .map_err(|e: String| ApiError::new(StatusCode::NOT_FOUND, "unknown_query", "", e))?;
    let snap = state.require_snapshot()?;
    let request = QueryRequest::from_json(&body)?;
    let resolved = resolve_query(&request, &snap, &state.store.regions())?;
    let payload = execute(kind, &snap, &resolved, &state.glyph_sizes);
    Ok(Json(payload).into_response())
}

fn versioned(view: StoreView) -> Response {
    let etag = HeaderValue::from_str(&format!("\"{}\"", view.version)).expect("digits are valid");
    ([(header::ETAG, etag)], Json(view)).into_response()
}

async fn get_regions(State(state): State<Arc<AppState>>) -> Response {
    versioned(state.store.view())
}

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(raw) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let bad = || {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_request",
            "If-Match",
            "expected a store version such as \"3\"",
        )
    };
    let text = raw.to_str().map_err(|_| bad())?.trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse().map(Some).map_err(|_| bad())
}

async fn put_regions(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let snap = state.require_snapshot()?;
    let header_version = if_match(&headers)?;
    let (body_version, regions) = store::parse_put_body(&body, snap.gazetteer())?;
    let base = match (header_version, body_version) {
        (Some(h), Some(b)) if h != b => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_request",
                "version",
                format!("If-Match {h} disagrees with body version {b}"),
            ))
        }
        (h, b) => h.or(b),
    };
    match state.store.replace(base, regions) {
        Ok(view) => Ok(versioned(view)),
        Err(e @ StoreError::Conflict { .. }) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "version_conflict",
            "version",
            e.to_string(),
        )),
        Err(e) => Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "store_failed",
            "",
            e.to_string(),
        )),
    }
}

#[derive(Deserialize)]
struct SuitabilityParams {
    bbox: Option<String>,
    res: Option<String>,
}

async fn suitability(
    State(state): State<Arc<AppState>>,
    Query(params): Query<SuitabilityParams>,
) -> Result<Response, ApiError> {
    let snap = state.require_snapshot()?;
    let grid = snap.grid().ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "no_suitability",
            "",
            "the loaded snapshot has no suitability grid",
        )
    })?;
    let bad = |field: &str, message: String| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", field, message)
    };
    let bbox = match params.bbox.as_deref() {
        Some(raw) => BBox::parse(raw).map_err(|e| bad("bbox", e.to_string()))?,
        None => grid.extent(),
    };
    let res = params
        .res
        .as_deref()
        .map(|raw| {
            raw.trim()
                .parse::<f64>()
                .map_err(|_| bad("res", format!("malformed resolution {raw:?}")))
        })
        .transpose()?;
    let window = classify_window(grid, bbox, res).map_err(|e| {
        bad(
            if matches!(e, geoden_core::WindowError::MalformedBbox(_)) {
                "bbox"
            } else {
                "res"
            },
            e.to_string(),
        )
    })?;
    Ok(Json(window).into_response())
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let Some(dir) = state.data_dir.clone() else {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "no_data_dir",
            "",
            "the service was started without a data directory",
        ));
    };
    let loaded = tokio::task::spawn_blocking(move || load_data_dir(&dir))
        .await
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "reload_failed",
                "",
                e.to_string(),
            )
        })?
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "reload_failed",
                "",
                e.to_string(),
            )
        })?;
    let meta = loaded.snapshot.meta().clone();
    state.replace_snapshot(loaded.snapshot);
    Ok(Json(meta).into_response())
}
