//! Service operations over the KB handle, the case store and the metrics,
//! independent of the HTTP layer.

use std::path::Path;
use std::time::Instant;

use chrono::Utc;
use gpva_core::caseflow::{CaseError, CaseRecord, CaseState, CaseSummary, CorrectionGuidance, DecisionRequest};
use gpva_core::intake::{parse_application, validate_items, Application, FieldFinding, IntakeError, ItemIssue, LineItem};
use gpva_core::verify::{Finding, VerificationReport};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ServiceConfig;
use crate::engine::Verifier;
use crate::kb_handle::{load_kb, KbHandle, KbLoadError};
use crate::metrics::{MetricsRecorder, MetricsSnapshot};
use crate::store::{CaseStore, StoreError};

/// Failure classes; the HTTP layer maps each to a status code.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    /// Malformed input (400).
    #[error("{message}")]
    BadRequest { message: String, details: Value },
    /// Unknown case (404).
    #[error("{0}")]
    NotFound(String),
    /// Wrong state or a concurrent write (409).
    #[error("{message}")]
    Conflict { message: String, details: Value },
    /// Well-formed but invalid input (422).
    #[error("{message}")]
    Unprocessable { message: String, details: Value },
    /// Storage or integrity failure (500).
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::BadRequest { .. } => "bad_request",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Conflict { .. } => "conflict",
            ServiceError::Unprocessable { .. } => "unprocessable",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn details(&self) -> Value {
        match self {
            ServiceError::BadRequest { details, .. }
            | ServiceError::Conflict { details, .. }
            | ServiceError::Unprocessable { details, .. } => details.clone(),
            _ => Value::Null,
        }
    }
}

impl From<CaseError> for ServiceError {
    fn from(e: CaseError) -> Self {
        let message = e.to_string();
        match e {
            CaseError::IllegalTransition { state, event } => ServiceError::Conflict {
                message,
                details: json!({ "state": state, "event": event }),
            },
            CaseError::UndecidedFindings(items) => ServiceError::Conflict { message, details: json!({ "undecided_items": items }) },
            CaseError::DuplicateDecision { .. }
            | CaseError::NoDecisionToSupersede { .. }
            | CaseError::RevisionOrder { .. }
            | CaseError::ReportMismatch(_) => ServiceError::Conflict { message, details: Value::Null },
            CaseError::UnknownItem(_)
            | CaseError::EmptyJustification
            | CaseError::MissingFinalCode
            | CaseError::OverrideMatchesSuggestion(_)
            | CaseError::NothingToAccept(_)
            | CaseError::AcceptMismatch { .. }
            | CaseError::DecisionMismatch(_)
            | CaseError::InvalidRating(_)
            | CaseError::MissingOfficer
            | CaseError::AppMismatch { .. } => ServiceError::Unprocessable { message, details: Value::Null },
            CaseError::Integrity { .. } | CaseError::EmptyLog | CaseError::Encoding(_) => ServiceError::Internal(message),
        }
    }
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(_) => ServiceError::NotFound(message),
            StoreError::AlreadyExists(_) | StoreError::Conflict { .. } => ServiceError::Conflict { message, details: Value::Null },
            StoreError::InvalidId(_) => ServiceError::BadRequest { message, details: Value::Null },
            StoreError::Io { .. } | StoreError::Corrupt { .. } => ServiceError::Internal(message),
        }
    }
}

impl From<KbLoadError> for ServiceError {
    fn from(e: KbLoadError) -> Self {
        let message = e.to_string();
        match e {
            KbLoadError::NotNewer { .. } => ServiceError::Conflict { message, details: Value::Null },
            KbLoadError::Invalid(_) => ServiceError::Unprocessable { message, details: Value::Null },
            KbLoadError::Read { .. } => ServiceError::BadRequest { message, details: Value::Null },
        }
    }
}

fn intake_error(e: IntakeError) -> ServiceError {
    ServiceError::BadRequest { message: format!("application document rejected: {e}"), details: json!({ "document": e.to_string() }) }
}

fn item_errors(issues: &[ItemIssue]) -> ServiceError {
    ServiceError::BadRequest {
        message: format!("application document has {} item-level error(s)", issues.len()),
        details: json!({ "items": issues }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub app_id: String,
    pub revision: u32,
    pub state: CaseState,
    /// True for a new case, false for a resubmission.
    pub created: bool,
    /// Non-blocking field observations (e.g. a missing claimed code).
    pub warnings: Vec<FieldFinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOutcome {
    pub app_id: String,
    pub revision: u32,
    pub state: CaseState,
    pub guidance: Vec<CorrectionGuidance>,
}

/// Full case view for detail screens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDetail {
    pub summary: CaseSummary,
    pub undecided_items: Vec<u32>,
    pub case: CaseRecord,
}

impl CaseDetail {
    pub fn of(case: CaseRecord) -> Self {
        Self { summary: case.summary(), undecided_items: case.undecided_items(), case }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbInfo {
    pub version: String,
    pub fingerprint: String,
    pub headings: usize,
    pub notes: usize,
}

/// Shared state behind the HTTP API.
#[derive(Debug)]
pub struct Service {
    config: ServiceConfig,
    kb: KbHandle,
    store: CaseStore,
    verifier: Verifier,
    metrics: MetricsRecorder,
}

impl Service {
    /// Loads the KB from `config.kb_path` and opens the case store.
    pub fn from_config(config: ServiceConfig) -> Result<Self, ServiceError> {
        let kb = load_kb(&config.kb_path)?;
        let store = CaseStore::open(&config.storage_path)?;
        let verifier = Verifier::from_config(&config);
        Ok(Self::new(config, KbHandle::new(kb), store, verifier))
    }

    pub fn new(config: ServiceConfig, kb: KbHandle, store: CaseStore, verifier: Verifier) -> Self {
        Self { config, kb, store, verifier, metrics: MetricsRecorder::default() }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn kb(&self) -> &KbHandle {
        &self.kb
    }

    pub fn store(&self) -> &CaseStore {
        &self.store
    }

    pub fn verifier(&self) -> &Verifier {
        &self.verifier
    }

    /// Accepts an application document. A new app id opens a case; an app
    /// id whose case awaits correction is taken as its next revision.
    pub fn submit(&self, document: &[u8]) -> Result<SubmitOutcome, ServiceError> {
        let parsed = parse_application(document).map_err(intake_error)?;
        if !parsed.is_clean() {
            return Err(item_errors(&parsed.issues));
        }
        let app = parsed.application;
        if self.store.exists(&app.app_id) {
            return self.resubmit_parsed(app);
        }
        let warnings = validate_items(&app);
        let app = Application { revision: 1, ..app };
        let case = CaseRecord::submit(app, Utc::now())?;
        self.store.create(&case)?;
        Ok(SubmitOutcome { app_id: case.app_id().to_string(), revision: 1, state: case.state(), created: true, warnings })
    }

    /// Resubmits a corrected document for an existing case.
    pub fn resubmit(&self, app_id: &str, document: &[u8]) -> Result<SubmitOutcome, ServiceError> {
        let parsed = parse_application(document).map_err(intake_error)?;
        if !parsed.is_clean() {
            return Err(item_errors(&parsed.issues));
        }
        if parsed.application.app_id != app_id {
            return Err(ServiceError::Unprocessable {
                message: format!("document is for {}, not {app_id}", parsed.application.app_id),
                details: Value::Null,
            });
        }
        self.resubmit_parsed(parsed.application)
    }

    /// The service numbers revisions itself: a resubmission always becomes
    /// the case's next revision, whatever the document header says.
    fn resubmit_parsed(&self, app: Application) -> Result<SubmitOutcome, ServiceError> {
        let mut case = self.store.load(&app.app_id)?;
        let version = case.version();
        let warnings = validate_items(&app);
        let app = Application { revision: case.revision() + 1, ..app };
        case.resubmit(app, Utc::now())?;
        self.store.save(&case, version)?;
        Ok(SubmitOutcome { app_id: case.app_id().to_string(), revision: case.revision(), state: case.state(), created: false, warnings })
    }

    /// Runs verification on the current revision against one KB snapshot.
    pub fn verify(&self, app_id: &str) -> Result<VerificationReport, ServiceError> {
        let mut case = self.store.load(app_id)?;
        let version = case.version();
        case.start_verification(Utc::now())?;
        let kb = self.kb.snapshot();
        let started = Instant::now();
        let report = self.verifier.verify(&kb, &case.current().application);
        let elapsed = started.elapsed();
        case.issue_findings(report.clone(), Utc::now())?;
        self.store.save(&case, version)?;
        self.metrics.record(&report, elapsed);
        Ok(report)
    }

    /// Records (or, with `supersede`, replaces) a decision on one item.
    pub fn decide(&self, app_id: &str, request: DecisionRequest, supersede: bool) -> Result<CaseDetail, ServiceError> {
        self.mutate(app_id, |case| {
            if supersede {
                case.supersede_decision(request, Utc::now())
            } else {
                case.record_decision(request, Utc::now())
            }
        })
    }

    pub fn request_correction(&self, app_id: &str, officer_id: &str) -> Result<CorrectionOutcome, ServiceError> {
        let mut case = self.store.load(app_id)?;
        let version = case.version();
        let guidance = case.request_correction(officer_id, Utc::now())?;
        self.store.save(&case, version)?;
        Ok(CorrectionOutcome { app_id: case.app_id().to_string(), revision: case.revision(), state: case.state(), guidance })
    }

    pub fn approve(&self, app_id: &str, officer_id: &str) -> Result<CaseDetail, ServiceError> {
        self.mutate(app_id, |case| case.approve(officer_id, Utc::now()))
    }

    pub fn reject(&self, app_id: &str, officer_id: &str, reason: &str) -> Result<CaseDetail, ServiceError> {
        self.mutate(app_id, |case| case.reject(officer_id, reason, Utc::now()))
    }

    pub fn close(&self, app_id: &str) -> Result<CaseDetail, ServiceError> {
        self.mutate(app_id, |case| case.close(Utc::now()))
    }

    fn mutate(
        &self,
        app_id: &str,
        op: impl FnOnce(&mut CaseRecord) -> Result<(), CaseError>,
    ) -> Result<CaseDetail, ServiceError> {
        let mut case = self.store.load(app_id)?;
        let version = case.version();
        op(&mut case)?;
        self.store.save(&case, version)?;
        Ok(CaseDetail::of(case))
    }

    pub fn case(&self, app_id: &str) -> Result<CaseDetail, ServiceError> {
        Ok(CaseDetail::of(self.store.load(app_id)?))
    }

    pub fn list_cases(&self, state: Option<CaseState>) -> Result<Vec<CaseSummary>, ServiceError> {
        let mut rows = self.store.list()?;
        if let Some(s) = state {
            rows.retain(|r| r.state == s);
        }
        Ok(rows)
    }

    /// Classifies a single item against the active KB without touching any
    /// case (the what-if sandbox).
    pub fn classify(&self, item: &LineItem) -> Finding {
        self.verifier.verify_item(&self.kb.snapshot(), item)
    }

    pub fn kb_info(&self) -> KbInfo {
        let kb = self.kb.snapshot();
        KbInfo {
            version: kb.version().to_string(),
            fingerprint: kb.fingerprint(),
            headings: kb.heading_count(),
            notes: kb.notes().len(),
        }
    }

    /// Swaps in the KB at `path` (the configured path when `None`).
    pub fn reload_kb_from_path(&self, path: Option<&Path>) -> Result<KbInfo, ServiceError> {
        self.kb.reload_from_path(path.unwrap_or(&self.config.kb_path))?;
        Ok(self.kb_info())
    }

    /// Swaps in a KB given as a JSON document.
    pub fn reload_kb_from_bytes(&self, bytes: &[u8]) -> Result<KbInfo, ServiceError> {
        self.kb.reload_from_bytes(bytes)?;
        Ok(self.kb_info())
    }

    pub fn metrics(&self) -> MetricsSnapshot {
        self.metrics.snapshot(self.config.manual_seconds_per_item)
    }
}
