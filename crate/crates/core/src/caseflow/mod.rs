//! Case lifecycle: the verification state machine with its correction loop,
//! officer adjudication, and an append-only audit log from which every case
//! can be rebuilt.
//!
//! ```text
//! Submitted → UnderVerification → FindingsIssued → Approved → Closed
//!                   ↑                    │  └────→ Rejected → Closed
//!              Resubmitted ← CorrectionRequested
//! ```
//!
//! Every operation validates first and then appends its audit entries, so a
//! failed operation leaves the case untouched. The record applies the event
//! decoded from the sealed entry — exactly what [`replay`] applies — so a
//! live case and its replayed log can never diverge.

mod audit;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use audit::{entry_digest, parse_json_lines, replay, to_json_lines, Actor, AuditEntry, EventKind};

use crate::hs::HsCode;
use crate::intake::Application;
use crate::verify::{Finding, Status, Summary, VerificationReport};

/// Where a case stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseState {
    Submitted,
    UnderVerification,
    FindingsIssued,
    CorrectionRequested,
    Resubmitted,
    Approved,
    Rejected,
    Closed,
}

impl CaseState {
    pub const ALL: [CaseState; 8] = [
        CaseState::Submitted,
        CaseState::UnderVerification,
        CaseState::FindingsIssued,
        CaseState::CorrectionRequested,
        CaseState::Resubmitted,
        CaseState::Approved,
        CaseState::Rejected,
        CaseState::Closed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseState::Submitted => "Submitted",
            CaseState::UnderVerification => "UnderVerification",
            CaseState::FindingsIssued => "FindingsIssued",
            CaseState::CorrectionRequested => "CorrectionRequested",
            CaseState::Resubmitted => "Resubmitted",
            CaseState::Approved => "Approved",
            CaseState::Rejected => "Rejected",
            CaseState::Closed => "Closed",
        }
    }

    /// The state a transition event leads to from `self`, if the edge exists.
    pub fn next(self, event: EventKind) -> Option<CaseState> {
        use CaseState::*;
        match (self, event) {
            (Submitted | Resubmitted, EventKind::VerificationStarted) => Some(UnderVerification),
            (UnderVerification, EventKind::FindingsIssued) => Some(FindingsIssued),
            (FindingsIssued, EventKind::CorrectionRequested) => Some(CorrectionRequested),
            (FindingsIssued, EventKind::Approved) => Some(Approved),
            (FindingsIssued, EventKind::Rejected) => Some(Rejected),
            (CorrectionRequested, EventKind::Resubmitted) => Some(Resubmitted),
            (Approved | Rejected, EventKind::Closed) => Some(Closed),
            _ => None,
        }
    }
}

impl fmt::Display for CaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for CaseState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseState::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown case state {s:?}"))
    }
}

/// What the officer did with the suggestion for one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionAction {
    /// Take the suggested code (the claimed code when the item verified).
    AcceptAi,
    /// Substitute another code; requires a justification.
    Override,
}

/// A recorded per-item decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfficerDecision {
    /// Revision the decision applies to.
    pub revision: u32,
    pub item_index: u32,
    pub action: DecisionAction,
    pub final_code: HsCode,
    /// The engine's suggestion at the time of the decision.
    pub suggested_code: Option<HsCode>,
    pub justification: String,
    pub officer_id: String,
    pub decided_at: DateTime<Utc>,
    /// Optional 1–5 usefulness rating of the suggestion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usefulness: Option<u8>,
}

/// The officer's input for [`CaseRecord::record_decision`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub item_index: u32,
    pub action: DecisionAction,
    /// Required for `override`; for `accept_ai` it may be omitted and must
    /// otherwise equal the accepted code.
    #[serde(default)]
    pub final_code: Option<HsCode>,
    #[serde(default)]
    pub justification: String,
    pub officer_id: String,
    #[serde(default)]
    pub usefulness: Option<u8>,
}

/// Per-item guidance sent to the applicant with a correction request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionGuidance {
    pub item_index: u32,
    pub status: Status,
    pub claimed_code: Option<HsCode>,
    pub suggested_code: Option<HsCode>,
    /// The finding's full explanation text.
    pub guidance: String,
}

impl CorrectionGuidance {
    /// Guidance for every finding that did not verify, in item order.
    pub fn from_report(report: &VerificationReport) -> Vec<Self> {
        report
            .findings
            .iter()
            .filter(|f| f.status != Status::Verified)
            .map(|f| CorrectionGuidance {
                item_index: f.item_index,
                status: f.status,
                claimed_code: f.claimed_code.clone(),
                suggested_code: f.suggested_code().cloned(),
                guidance: f.explanation.clone(),
            })
            .collect()
    }
}

/// The typed content of an audit entry. Serialized adjacently tagged: the
/// tag becomes [`AuditEntry::event`] and the content its payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum CaseEvent {
    Submitted { application: Application },
    VerificationStarted { revision: u32 },
    KbVersionUsed { revision: u32, kb_version: String },
    FindingsIssued { report: VerificationReport },
    DecisionRecorded { decision: OfficerDecision },
    DecisionSuperseded { decision: OfficerDecision },
    CorrectionRequested { guidance: Vec<CorrectionGuidance> },
    Resubmitted { application: Application },
    Approved { officer_id: String },
    Rejected { officer_id: String, reason: String },
    Closed {},
}

impl CaseEvent {
    pub fn kind(&self) -> EventKind {
        match self {
            CaseEvent::Submitted { .. } => EventKind::Submitted,
            CaseEvent::VerificationStarted { .. } => EventKind::VerificationStarted,
            CaseEvent::KbVersionUsed { .. } => EventKind::KbVersionUsed,
            CaseEvent::FindingsIssued { .. } => EventKind::FindingsIssued,
            CaseEvent::DecisionRecorded { .. } => EventKind::DecisionRecorded,
            CaseEvent::DecisionSuperseded { .. } => EventKind::DecisionSuperseded,
            CaseEvent::CorrectionRequested { .. } => EventKind::CorrectionRequested,
            CaseEvent::Resubmitted { .. } => EventKind::Resubmitted,
            CaseEvent::Approved { .. } => EventKind::Approved,
            CaseEvent::Rejected { .. } => EventKind::Rejected,
            CaseEvent::Closed {} => EventKind::Closed,
        }
    }
}

fn join_items(items: &[u32]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("illegal transition: {event} is not allowed in state {state}")]
    IllegalTransition { state: CaseState, event: EventKind },
    #[error("undecided findings: items {}", join_items(.0))]
    UndecidedFindings(Vec<u32>),
    #[error("unknown item {0} in the current revision")]
    UnknownItem(u32),
    #[error("item {item_index} of revision {revision} already has a decision; supersede it explicitly")]
    DuplicateDecision { item_index: u32, revision: u32 },
    #[error("item {item_index} of revision {revision} has no decision to supersede")]
    NoDecisionToSupersede { item_index: u32, revision: u32 },
    #[error("an override requires a non-empty justification")]
    EmptyJustification,
    #[error("an override requires a final code")]
    MissingFinalCode,
    #[error("an override must differ from the suggested code {0}")]
    OverrideMatchesSuggestion(HsCode),
    #[error("accept_ai on item {0}: there is no code to accept")]
    NothingToAccept(u32),
    #[error("accept_ai must keep code {expected}, not {found}")]
    AcceptMismatch { expected: HsCode, found: HsCode },
    #[error("decision for item {0} does not match the issued findings")]
    DecisionMismatch(u32),
    #[error("usefulness rating {0} is outside 1..=5")]
    InvalidRating(u8),
    #[error("officer id must not be empty")]
    MissingOfficer,
    #[error("application {found} does not belong to case {expected}")]
    AppMismatch { expected: String, found: String },
    #[error("expected revision {expected}, found {found}")]
    RevisionOrder { expected: u32, found: u32 },
    #[error("report does not match the case: {0}")]
    ReportMismatch(String),
    #[error("audit integrity violation at seq {seq}: {reason}")]
    Integrity { seq: u64, reason: String },
    #[error("the audit log is empty; no case exists")]
    EmptyLog,
    #[error("event encoding failed: {0}")]
    Encoding(String),
}

/// One submitted version of the application with its verification result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub revision: u32,
    pub application: Application,
    /// Present once findings were issued for this revision.
    pub report: Option<VerificationReport>,
}

/// Row data for case lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub app_id: String,
    pub applicant: String,
    pub state: CaseState,
    pub revision: u32,
    pub summary: Option<Summary>,
    pub submitted_at: DateTime<Utc>,
    pub version: u64,
}

/// A case and its full audit log.
///
/// Fields are private: the only way to change a case is through its
/// operations, each of which appends audit entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    app_id: String,
    state: CaseState,
    revisions: Vec<Revision>,
    decisions: Vec<OfficerDecision>,
    audit: Vec<AuditEntry>,
}

impl CaseRecord {
    /// Opens a case for a first submission (revision 1).
    pub fn submit(application: Application, at: DateTime<Utc>) -> Result<Self, CaseError> {
        let event = CaseEvent::Submitted { application };
        let entry = AuditEntry::seal(1, at, Actor::Applicant, &event)?;
        let CaseEvent::Submitted { application } = entry.decode()? else {
            return Err(CaseError::Encoding(String::from("submitted event did not round-trip")));
        };
        let mut case = Self::genesis(application)?;
        case.audit.push(entry);
        Ok(case)
    }

    pub(crate) fn genesis(application: Application) -> Result<Self, CaseError> {
        if application.revision != 1 {
            return Err(CaseError::RevisionOrder { expected: 1, found: application.revision });
        }
        Ok(Self {
            app_id: application.app_id.clone(),
            state: CaseState::Submitted,
            revisions: alloc::vec![Revision { revision: 1, application, report: None }],
            decisions: Vec::new(),
            audit: Vec::new(),
        })
    }

    pub fn app_id(&self) -> &str {
        &self.app_id
    }

    pub fn state(&self) -> CaseState {
        self.state
    }

    pub fn revisions(&self) -> &[Revision] {
        &self.revisions
    }

    pub fn current(&self) -> &Revision {
        self.revisions.last().expect("a case has at least one revision")
    }

    pub fn revision(&self) -> u32 {
        self.current().revision
    }

    pub fn current_report(&self) -> Option<&VerificationReport> {
        self.current().report.as_ref()
    }

    /// Every decision ever recorded, superseded ones included, in order.
    pub fn decisions(&self) -> &[OfficerDecision] {
        &self.decisions
    }

    /// The decision in force for an item of a revision: the latest one.
    pub fn decision_for(&self, revision: u32, item_index: u32) -> Option<&OfficerDecision> {
        self.decisions.iter().rev().find(|d| d.revision == revision && d.item_index == item_index)
    }

    /// Non-verified items of the current report that have no decision yet.
    pub fn undecided_items(&self) -> Vec<u32> {
        let rev = self.revision();
        self.current_report()
            .map(|r| {
                r.findings
                    .iter()
                    .filter(|f| f.status != Status::Verified && self.decision_for(rev, f.item_index).is_none())
                    .map(|f| f.item_index)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// Number of audit entries; used for optimistic concurrency checks.
    pub fn version(&self) -> u64 {
        self.audit.len() as u64
    }

    /// Entries appended after `version`.
    pub fn entries_since(&self, version: u64) -> &[AuditEntry] {
        let from = usize::try_from(version).unwrap_or(usize::MAX).min(self.audit.len());
        &self.audit[from..]
    }

    pub fn summary(&self) -> CaseSummary {
        let cur = self.current();
        CaseSummary {
            app_id: self.app_id.clone(),
            applicant: cur.application.applicant.clone(),
            state: self.state,
            revision: cur.revision,
            summary: cur.report.as_ref().map(|r| r.summary),
            submitted_at: self.revisions[0].application.submitted_at,
            version: self.version(),
        }
    }

    /// Submitted or Resubmitted → UnderVerification.
    pub fn start_verification(&mut self, at: DateTime<Utc>) -> Result<(), CaseError> {
        let revision = self.revision();
        self.commit(Actor::System, at, CaseEvent::VerificationStarted { revision })
    }

    /// UnderVerification → FindingsIssued, recording the KB version used.
    pub fn issue_findings(&mut self, report: VerificationReport, at: DateTime<Utc>) -> Result<(), CaseError> {
        if self.state != CaseState::UnderVerification {
            return Err(CaseError::IllegalTransition { state: self.state, event: EventKind::FindingsIssued });
        }
        self.check_report(&report)?;
        let revision = self.revision();
        let before = self.clone();
        self.commit(Actor::System, at, CaseEvent::KbVersionUsed { revision, kb_version: report.kb_version.clone() })?;
        if let Err(e) = self.commit(Actor::System, at, CaseEvent::FindingsIssued { report }) {
            *self = before;
            return Err(e);
        }
        Ok(())
    }

    /// Records the officer's first decision on an item of the current revision.
    pub fn record_decision(&mut self, request: DecisionRequest, at: DateTime<Utc>) -> Result<(), CaseError> {
        let decision = self.build_decision(request, at)?;
        let actor = Actor::Officer(decision.officer_id.clone());
        self.commit(actor, at, CaseEvent::DecisionRecorded { decision })
    }

    /// Replaces the decision in force for an item; the earlier one stays in
    /// the log.
    pub fn supersede_decision(&mut self, request: DecisionRequest, at: DateTime<Utc>) -> Result<(), CaseError> {
        let decision = self.build_decision(request, at)?;
        let actor = Actor::Officer(decision.officer_id.clone());
        self.commit(actor, at, CaseEvent::DecisionSuperseded { decision })
    }

    /// FindingsIssued → CorrectionRequested. Returns the guidance sent.
    pub fn request_correction(&mut self, officer_id: &str, at: DateTime<Utc>) -> Result<Vec<CorrectionGuidance>, CaseError> {
        check_officer(officer_id)?;
        let guidance = self.current_report().map(CorrectionGuidance::from_report).unwrap_or_default();
        self.commit(Actor::Officer(officer_id.to_string()), at, CaseEvent::CorrectionRequested { guidance: guidance.clone() })?;
        Ok(guidance)
    }

    /// CorrectionRequested → Resubmitted with the next revision.
    pub fn resubmit(&mut self, application: Application, at: DateTime<Utc>) -> Result<(), CaseError> {
        self.commit(Actor::Applicant, at, CaseEvent::Resubmitted { application })
    }

    /// FindingsIssued → Approved; every non-verified item needs a decision.
    pub fn approve(&mut self, officer_id: &str, at: DateTime<Utc>) -> Result<(), CaseError> {
        check_officer(officer_id)?;
        self.commit(Actor::Officer(officer_id.to_string()), at, CaseEvent::Approved { officer_id: officer_id.to_string() })
    }

    /// FindingsIssued → Rejected; every non-verified item needs a decision.
    pub fn reject(&mut self, officer_id: &str, reason: &str, at: DateTime<Utc>) -> Result<(), CaseError> {
        check_officer(officer_id)?;
        self.commit(
            Actor::Officer(officer_id.to_string()),
            at,
            CaseEvent::Rejected { officer_id: officer_id.to_string(), reason: reason.to_string() },
        )
    }

    /// Approved or Rejected → Closed.
    pub fn close(&mut self, at: DateTime<Utc>) -> Result<(), CaseError> {
        self.commit(Actor::System, at, CaseEvent::Closed {})
    }

    /// Seals the event into an entry, applies the decoded event and appends
    /// the entry. Nothing changes when validation fails.
    fn commit(&mut self, actor: Actor, at: DateTime<Utc>, event: CaseEvent) -> Result<(), CaseError> {
        self.validate(&event)?;
        let entry = AuditEntry::seal(self.version() + 1, at, actor, &event)?;
        let decoded = entry.decode()?;
        self.apply(&decoded)?;
        self.audit.push(entry);
        Ok(())
    }

    fn build_decision(&self, request: DecisionRequest, at: DateTime<Utc>) -> Result<OfficerDecision, CaseError> {
        if self.state != CaseState::FindingsIssued {
            let event = if self.decision_for(self.revision(), request.item_index).is_some() {
                EventKind::DecisionSuperseded
            } else {
                EventKind::DecisionRecorded
            };
            return Err(CaseError::IllegalTransition { state: self.state, event });
        }
        let finding = self.finding(request.item_index)?;
        let suggested_code = finding.suggested_code().cloned();
        let final_code = match request.action {
            DecisionAction::AcceptAi => {
                let expected = accepted_code(finding).ok_or(CaseError::NothingToAccept(request.item_index))?;
                request.final_code.unwrap_or(expected)
            }
            DecisionAction::Override => request.final_code.ok_or(CaseError::MissingFinalCode)?,
        };
        Ok(OfficerDecision {
            revision: self.revision(),
            item_index: request.item_index,
            action: request.action,
            final_code,
            suggested_code,
            justification: request.justification,
            officer_id: request.officer_id,
            decided_at: at,
            usefulness: request.usefulness,
        })
    }

    fn finding(&self, item_index: u32) -> Result<&Finding, CaseError> {
        if self.current().application.item(item_index).is_none() {
            return Err(CaseError::UnknownItem(item_index));
        }
        self.current_report()
            .and_then(|r| r.finding(item_index))
            .ok_or(CaseError::UnknownItem(item_index))
    }

    fn check_report(&self, report: &VerificationReport) -> Result<(), CaseError> {
        if report.app_id != self.app_id {
            return Err(CaseError::ReportMismatch(format!("report is for {}", report.app_id)));
        }
        if report.revision != self.revision() {
            return Err(CaseError::ReportMismatch(format!(
                "report is for revision {}, the case is at revision {}",
                report.revision,
                self.revision()
            )));
        }
        let items: Vec<u32> = self.current().application.items.iter().map(|i| i.index).collect();
        let found: Vec<u32> = report.findings.iter().map(|f| f.item_index).collect();
        if items != found {
            return Err(CaseError::ReportMismatch(String::from("findings do not match the application items")));
        }
        Ok(())
    }

    fn check_decision(&self, d: &OfficerDecision, supersede: bool) -> Result<(), CaseError> {
        if d.revision != self.revision() {
            return Err(CaseError::RevisionOrder { expected: self.revision(), found: d.revision });
        }
        let finding = self.finding(d.item_index)?;
        if d.suggested_code.as_ref() != finding.suggested_code() {
            return Err(CaseError::DecisionMismatch(d.item_index));
        }
        check_officer(&d.officer_id)?;
        if let Some(r) = d.usefulness {
            if !(1..=5).contains(&r) {
                return Err(CaseError::InvalidRating(r));
            }
        }
        match d.action {
            DecisionAction::Override => {
                if d.justification.trim().is_empty() {
                    return Err(CaseError::EmptyJustification);
                }
                if let Some(s) = finding.suggested_code() {
                    if *s == d.final_code {
                        return Err(CaseError::OverrideMatchesSuggestion(s.clone()));
                    }
                }
            }
            DecisionAction::AcceptAi => {
                let expected = accepted_code(finding).ok_or(CaseError::NothingToAccept(d.item_index))?;
                if expected != d.final_code {
                    return Err(CaseError::AcceptMismatch { expected, found: d.final_code.clone() });
                }
            }
        }
        let exists = self.decision_for(d.revision, d.item_index).is_some();
        match (supersede, exists) {
            (false, true) => Err(CaseError::DuplicateDecision { item_index: d.item_index, revision: d.revision }),
            (true, false) => Err(CaseError::NoDecisionToSupersede { item_index: d.item_index, revision: d.revision }),
            _ => Ok(()),
        }
    }

    /// Checks that `event` is legal now, without changing anything.
    fn validate(&self, event: &CaseEvent) -> Result<(), CaseError> {
        let illegal = || CaseError::IllegalTransition { state: self.state, event: event.kind() };
        match event {
            CaseEvent::Submitted { .. } => Err(illegal()),
            CaseEvent::VerificationStarted { revision } => {
                self.state.next(event.kind()).ok_or_else(illegal)?;
                if *revision != self.revision() {
                    return Err(CaseError::RevisionOrder { expected: self.revision(), found: *revision });
                }
                Ok(())
            }
            CaseEvent::KbVersionUsed { revision, .. } => {
                if self.state != CaseState::UnderVerification {
                    return Err(illegal());
                }
                if *revision != self.revision() {
                    return Err(CaseError::RevisionOrder { expected: self.revision(), found: *revision });
                }
                Ok(())
            }
            CaseEvent::FindingsIssued { report } => {
                self.state.next(event.kind()).ok_or_else(illegal)?;
                self.check_report(report)
            }
            CaseEvent::DecisionRecorded { decision } | CaseEvent::DecisionSuperseded { decision } => {
                if self.state != CaseState::FindingsIssued {
                    return Err(illegal());
                }
                self.check_decision(decision, matches!(event, CaseEvent::DecisionSuperseded { .. }))
            }
            CaseEvent::CorrectionRequested { .. } | CaseEvent::Closed {} => {
                self.state.next(event.kind()).ok_or_else(illegal)?;
                Ok(())
            }
            CaseEvent::Resubmitted { application } => {
                self.state.next(event.kind()).ok_or_else(illegal)?;
                if application.app_id != self.app_id {
                    return Err(CaseError::AppMismatch { expected: self.app_id.clone(), found: application.app_id.clone() });
                }
                let expected = self.revision() + 1;
                if application.revision != expected {
                    return Err(CaseError::RevisionOrder { expected, found: application.revision });
                }
                Ok(())
            }
            CaseEvent::Approved { officer_id } | CaseEvent::Rejected { officer_id, .. } => {
                self.state.next(event.kind()).ok_or_else(illegal)?;
                check_officer(officer_id)?;
                let undecided = self.undecided_items();
                if !undecided.is_empty() {
                    return Err(CaseError::UndecidedFindings(undecided));
                }
                Ok(())
            }
        }
    }

    /// Validates and applies one event. Used both by live operations and by
    /// [`replay`].
    pub(crate) fn apply(&mut self, event: &CaseEvent) -> Result<(), CaseError> {
        self.validate(event)?;
        if let Some(next) = self.state.next(event.kind()) {
            self.state = next;
        }
        match event {
            CaseEvent::FindingsIssued { report } => {
                self.revisions.last_mut().expect("non-empty").report = Some(report.clone());
            }
            CaseEvent::DecisionRecorded { decision } | CaseEvent::DecisionSuperseded { decision } => {
                self.decisions.push(decision.clone());
            }
            CaseEvent::Resubmitted { application } => {
                self.revisions.push(Revision { revision: application.revision, application: application.clone(), report: None });
            }
            _ => {}
        }
        Ok(())
    }
}

fn check_officer(officer_id: &str) -> Result<(), CaseError> {
    if officer_id.trim().is_empty() {
        Err(CaseError::MissingOfficer)
    } else {
        Ok(())
    }
}

/// The code an `accept_ai` decision keeps: the claimed code for verified
/// items, the suggestion otherwise.
fn accepted_code(finding: &Finding) -> Option<HsCode> {
    match finding.status {
        Status::Verified => finding.claimed_code.clone(),
        _ => finding.suggested_code().cloned(),
    }
}
