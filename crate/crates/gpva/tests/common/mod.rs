//! Shared helpers for the service integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use gpva::config::ServiceConfig;
use gpva_core::caseflow::AuditEntry;
use gpva::Service;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture(name)).expect("fixture exists")
}

pub fn config(storage: &Path) -> ServiceConfig {
    ServiceConfig { kb_path: fixture("golden_kb.json"), storage_path: storage.to_path_buf(), ..ServiceConfig::default() }
}

pub fn service(storage: &Path) -> Arc<Service> {
    Arc::new(Service::from_config(config(storage)).expect("service starts"))
}

pub fn router(storage: &Path) -> (Router, Arc<Service>) {
    let svc = service(storage);
    (gpva::api::router(svc.clone()), svc)
}

/// Sends one request and returns the status and raw body.
pub async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Vec<u8>>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder().method(method).uri(uri).body(Body::from(body.into())).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec())
}

/// Like [`call`], decoding the body as JSON (`Null` when empty).
pub async fn call_json(app: &Router, method: Method, uri: &str, body: impl Into<Vec<u8>>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).expect("JSON body") };
    (status, value)
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call_json(app, Method::POST, uri, serde_json::to_vec(&body).unwrap()).await
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call_json(app, Method::GET, uri, Vec::new()).await
}

/// Event names of the audit entries that move the case between states.
pub fn transitions(audit: &Value) -> Vec<String> {
    let entries: Vec<AuditEntry> = serde_json::from_value(audit.clone()).expect("audit log decodes");
    entries.iter().filter(|e| e.event.is_transition()).map(|e| e.event.to_string()).collect()
}
