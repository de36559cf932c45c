#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use geoden_core::{load_data_dir, Snapshot};
use geoden_service::{router, AppState, RegionStore};
use geoden_testkit::fixture;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Bytes,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).expect("response is JSON")
    }
}

pub async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: &str,
    headers: &[(&str, &str)],
) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = req
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        headers,
        body,
    }
}

pub async fn post(app: &Router, uri: &str, body: &str) -> Reply {
    call(app, Method::POST, uri, body, &[]).await
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, "", &[]).await
}

/// Snapshot loaded from the fixture written into `dir`.
pub fn fixture_snapshot(dir: &Path) -> Snapshot {
    fixture::write_data_dir(dir).unwrap();
    load_data_dir(dir).unwrap().snapshot
}

/// Router over the fixture with an in-memory region store, plus the state
/// handle and a second, directly held copy of the snapshot.
pub fn fixture_app(dir: &Path) -> (Router, Arc<AppState>, Snapshot) {
    let snap = fixture_snapshot(dir);
    let state = Arc::new(AppState::new(
        Some(fixture_snapshot(dir)),
        Some(dir.to_path_buf()),
        RegionStore::in_memory(),
    ));
    (router(Arc::clone(&state), None), state, snap)
}
