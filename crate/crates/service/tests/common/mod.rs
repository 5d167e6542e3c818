#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;
use typematch::api::{router, AppState};
use typematch_core::reconcile::{FixtureProvider, Reconciler};
use typematch_core::store::ProjectStore;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn provider_flag() -> String {
    format!("fixture:{}", fixture("reconciliation.json").display())
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typematch"))
        .args(args)
        .env_remove(typematch::PROVIDER_ENV)
        .output()
        .expect("binary runs")
}

#[derive(Clone)]
pub struct App {
    pub router: Router,
    _dir: Arc<tempfile::TempDir>,
}

impl App {
    pub fn new(with_provider: bool) -> App {
        let dir = tempfile::tempdir().unwrap();
        let reconciler = with_provider.then(|| {
            Arc::new(Reconciler::new(Arc::new(FixtureProvider::load(fixture("reconciliation.json")).unwrap())))
        });
        let state = AppState::new(ProjectStore::open(dir.path()).unwrap(), reconciler);
        App::from_router(router(state), dir)
    }

    pub fn from_router(router: Router, dir: tempfile::TempDir) -> App {
        App { router, _dir: Arc::new(dir) }
    }

    pub async fn call(&self, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
        let request = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
        let response = self.router.clone().oneshot(request).await.unwrap();
        let status = response.status();
        (status, response.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    pub async fn json(&self, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, serde_json::Value) {
        let (status, bytes) = self.call(method, uri, body).await;
        (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
    }

    pub async fn upload(&self, name: &str) -> String {
        let csv = std::fs::read(fixture(name)).unwrap();
        let (status, body) = self.json(Method::POST, &format!("/projects?name={name}"), csv).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }

    pub async fn session(
        &self,
        source: &str,
        target: &str,
        config: serde_json::Value,
    ) -> (StatusCode, serde_json::Value) {
        let body = serde_json::json!({ "source": source, "target": target, "config": config });
        self.json(Method::POST, "/sessions", body.to_string()).await
    }
}
