//! HTTP API under `/v1`. Request and response bodies are JSON except the
//! application documents, which use the canonical text format.
//!
//! | Method | Path | Operation |
//! |---|---|---|
//! | POST | `/v1/applications` | submit (201) or resubmit (200) a document |
//! | POST | `/v1/applications/{id}/resubmit` | resubmit a corrected document |
//! | POST | `/v1/applications/{id}/verify` | run verification |
//! | POST | `/v1/applications/{id}/items/{index}/decision` | record or supersede a decision |
//! | POST | `/v1/applications/{id}/request-correction` | send correction guidance |
//! | POST | `/v1/applications/{id}/approve` | approve |
//! | POST | `/v1/applications/{id}/reject` | reject |
//! | POST | `/v1/applications/{id}/close` | close |
//! | GET | `/v1/cases[?state=]` | case list |
//! | GET | `/v1/cases/{id}` | case detail with revisions, reports, decisions and audit |
//! | GET | `/v1/cases/{id}/audit` | audit log |
//! | POST | `/v1/classify` | what-if classification, never persisted |
//! | GET | `/v1/kb` | active KB version |
//! | POST | `/v1/kb/reload` | reload the KB |
//! | GET | `/v1/metrics` | throughput metrics |
//!
//! Errors are `{"error": <class>, "message": <text>, "details": <any>}` with
//! 400 (malformed), 404 (unknown case), 409 (wrong state, undecided findings,
//! version conflict), 422 (invalid decision or KB) or 500.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gpva_core::caseflow::{CaseState, DecisionAction, DecisionRequest};
use gpva_core::intake::LineItem;
use gpva_core::HsCode;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::service::{Service, ServiceError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::BadRequest { .. } => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::Unprocessable { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({ "error": self.code(), "message": self.to_string(), "details": self.details() });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ServiceError>;
type Shared = State<Arc<Service>>;

fn json_body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> ApiResult<T> {
    let bytes = if bytes.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { bytes };
    serde_json::from_slice(bytes)
        .map_err(|e| ServiceError::BadRequest { message: format!("invalid JSON body: {e}"), details: Value::Null })
}

/// Runs blocking service work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(format!("worker failed: {e}")))?
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/v1/applications", post(submit))
        .route("/v1/applications/{id}/resubmit", post(resubmit))
        .route("/v1/applications/{id}/verify", post(verify))
        .route("/v1/applications/{id}/items/{index}/decision", post(decide))
        .route("/v1/applications/{id}/request-correction", post(request_correction))
        .route("/v1/applications/{id}/approve", post(approve))
        .route("/v1/applications/{id}/reject", post(reject))
        .route("/v1/applications/{id}/close", post(close))
        .route("/v1/cases", get(list_cases))
        .route("/v1/cases/{id}", get(case_detail))
        .route("/v1/cases/{id}/audit", get(case_audit))
        .route("/v1/classify", post(classify))
        .route("/v1/kb", get(kb_info))
        .route("/v1/kb/reload", post(reload_kb))
        .route("/v1/metrics", get(metrics))
        .with_state(service)
}

async fn submit(State(svc): Shared, body: Bytes) -> ApiResult<Response> {
    let outcome = blocking(move || svc.submit(&body)).await?;
    let status = if outcome.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(outcome)).into_response())
}

async fn resubmit(State(svc): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let outcome = blocking(move || svc.resubmit(&id, &body)).await?;
    Ok(Json(outcome).into_response())
}

async fn verify(State(svc): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let report = blocking(move || svc.verify(&id)).await?;
    // Same bytes as the CLI's JSON report.
    Ok(([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response())
}

#[derive(Debug, Deserialize)]
struct DecisionBody {
    action: DecisionAction,
    #[serde(default)]
    final_code: Option<String>,
    #[serde(default)]
    justification: String,
    officer_id: String,
    #[serde(default)]
    usefulness: Option<u8>,
    /// Replace an existing decision instead of recording a first one.
    #[serde(default)]
    supersede: bool,
}

async fn decide(State(svc): Shared, Path((id, index)): Path<(String, u32)>, body: Bytes) -> ApiResult<Response> {
    let body: DecisionBody = json_body(&body)?;
    let final_code = body
        .final_code
        .as_deref()
        .map(HsCode::normalize)
        .transpose()
        .map_err(|e| ServiceError::Unprocessable { message: format!("final_code: {e}"), details: Value::Null })?;
    let request = DecisionRequest {
        item_index: index,
        action: body.action,
        final_code,
        justification: body.justification,
        officer_id: body.officer_id,
        usefulness: body.usefulness,
    };
    let supersede = body.supersede;
    let detail = blocking(move || svc.decide(&id, request, supersede)).await?;
    Ok(Json(detail).into_response())
}

#[derive(Debug, Deserialize)]
struct OfficerBody {
    officer_id: String,
    #[serde(default)]
    reason: String,
}

async fn request_correction(State(svc): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: OfficerBody = json_body(&body)?;
    let outcome = blocking(move || svc.request_correction(&id, &body.officer_id)).await?;
    Ok(Json(outcome).into_response())
}

async fn approve(State(svc): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: OfficerBody = json_body(&body)?;
    let detail = blocking(move || svc.approve(&id, &body.officer_id)).await?;
    Ok(Json(detail).into_response())
}

async fn reject(State(svc): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: OfficerBody = json_body(&body)?;
    let detail = blocking(move || svc.reject(&id, &body.officer_id, &body.reason)).await?;
    Ok(Json(detail).into_response())
}

async fn close(State(svc): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let detail = blocking(move || svc.close(&id)).await?;
    Ok(Json(detail).into_response())
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    state: Option<String>,
}

async fn list_cases(State(svc): Shared, Query(q): Query<ListQuery>) -> ApiResult<Response> {
    let state = q
        .state
        .as_deref()
        .map(str::parse::<CaseState>)
        .transpose()
        .map_err(|message| ServiceError::BadRequest { message, details: Value::Null })?;
    let rows = blocking(move || svc.list_cases(state)).await?;
    Ok(Json(rows).into_response())
}

async fn case_detail(State(svc): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let detail = blocking(move || svc.case(&id)).await?;
    Ok(Json(detail).into_response())
}

async fn case_audit(State(svc): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let detail = blocking(move || svc.case(&id)).await?;
    Ok(Json(detail.case.audit()).into_response())
}

async fn classify(State(svc): Shared, body: Bytes) -> ApiResult<Response> {
    let item: LineItem = json_body(&body)?;
    let finding = blocking(move || Ok(svc.classify(&item))).await?;
    Ok(Json(finding).into_response())
}

async fn kb_info(State(svc): Shared) -> Json<crate::service::KbInfo> {
    Json(svc.kb_info())
}

/// Body forms: empty (reload the configured path), `{"path": "..."}`, or a
/// complete KB document.
async fn reload_kb(State(svc): Shared, body: Bytes) -> ApiResult<Response> {
    let info = blocking(move || {
        if body.iter().all(u8::is_ascii_whitespace) {
            return svc.reload_kb_from_path(None);
        }
        let value: Value = json_body(&body)?;
        match value.as_object() {
            Some(obj) if obj.len() == 1 && obj.contains_key("path") => {
                let path = obj["path"].as_str().map(PathBuf::from).ok_or_else(|| ServiceError::BadRequest {
                    message: String::from("path must be a string"),
                    details: Value::Null,
                })?;
                svc.reload_kb_from_path(Some(&path))
            }
            _ => svc.reload_kb_from_bytes(&body),
        }
    })
    .await?;
    Ok(Json(info).into_response())
}

async fn metrics(State(svc): Shared) -> Json<crate::metrics::MetricsSnapshot> {
    Json(svc.metrics())
}

/// Serves the API on the configured address until the process is stopped.
pub async fn serve(service: Arc<Service>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&service.config().listen).await?;
    axum::serve(listener, router(service)).await
}
