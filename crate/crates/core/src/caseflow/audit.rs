//! Append-only audit entries, payload digests and replay.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::{CaseError, CaseEvent, CaseRecord};

/// Who caused an audit entry. Serialized as `"system"`, `"applicant"` or
/// `"officer:<id>"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Actor {
    System,
    Applicant,
    Officer(String),
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::System => f.write_str("system"),
            Actor::Applicant => f.write_str("applicant"),
            Actor::Officer(id) => write!(f, "officer:{id}"),
        }
    }
}

impl FromStr for Actor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "system" => Ok(Actor::System),
            "applicant" => Ok(Actor::Applicant),
            _ => match s.strip_prefix("officer:") {
                Some(id) if !id.is_empty() => Ok(Actor::Officer(id.to_string())),
                _ => Err(format!("unknown actor {s:?}")),
            },
        }
    }
}

impl Serialize for Actor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Actor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The kind of an audit entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Submitted,
    VerificationStarted,
    KbVersionUsed,
    FindingsIssued,
    DecisionRecorded,
    DecisionSuperseded,
    CorrectionRequested,
    Resubmitted,
    Approved,
    Rejected,
    Closed,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::Submitted,
        EventKind::VerificationStarted,
        EventKind::KbVersionUsed,
        EventKind::FindingsIssued,
        EventKind::DecisionRecorded,
        EventKind::DecisionSuperseded,
        EventKind::CorrectionRequested,
        EventKind::Resubmitted,
        EventKind::Approved,
        EventKind::Rejected,
        EventKind::Closed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Submitted => "submitted",
            EventKind::VerificationStarted => "verification_started",
            EventKind::KbVersionUsed => "kb_version_used",
            EventKind::FindingsIssued => "findings_issued",
            EventKind::DecisionRecorded => "decision_recorded",
            EventKind::DecisionSuperseded => "decision_superseded",
            EventKind::CorrectionRequested => "correction_requested",
            EventKind::Resubmitted => "resubmitted",
            EventKind::Approved => "approved",
            EventKind::Rejected => "rejected",
            EventKind::Closed => "closed",
        }
    }

    /// Whether entries of this kind move the case to a new state. Decisions
    /// and KB version records are annotations within a state.
    pub fn is_transition(self) -> bool {
        !matches!(self, EventKind::KbVersionUsed | EventKind::DecisionRecorded | EventKind::DecisionSuperseded)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of a case's audit log. Entries are created only by the case
/// operations and are never modified afterwards; [`CaseRecord::audit`] hands
/// out shared references only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    /// Gapless, starting at 1 for each case.
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub actor: Actor,
    pub event: EventKind,
    pub payload: Value,
    /// Lowercase hex SHA-256 of the canonical JSON of
    /// `[seq, at, actor, event, payload]`.
    pub digest: String,
}

/// Computes the digest stored in [`AuditEntry::digest`]. Object keys in the
/// payload are serialized in sorted order, so the encoding is canonical.
pub fn entry_digest(seq: u64, at: &DateTime<Utc>, actor: &Actor, event: EventKind, payload: &Value) -> String {
    let bytes = serde_json::to_vec(&(seq, at, actor, event, payload)).expect("audit fields serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl AuditEntry {
    pub(super) fn seal(seq: u64, at: DateTime<Utc>, actor: Actor, event: &CaseEvent) -> Result<Self, CaseError> {
        let value = serde_json::to_value(event).map_err(|e| CaseError::Encoding(format!("{e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(CaseError::Encoding(String::from("event did not encode as an object")));
        };
        let payload = obj.remove("payload").unwrap_or(Value::Object(Map::new()));
        let kind = event.kind();
        let digest = entry_digest(seq, &at, &actor, kind, &payload);
        Ok(Self { seq, at, actor, event: kind, payload, digest })
    }

    /// Recomputes the digest and compares it with the stored one.
    pub fn digest_matches(&self) -> bool {
        entry_digest(self.seq, &self.at, &self.actor, self.event, &self.payload) == self.digest
    }

    /// Decodes the typed event carried by this entry.
    pub fn decode(&self) -> Result<CaseEvent, CaseError> {
        let mut obj = Map::new();
        obj.insert(String::from("event"), Value::String(String::from(self.event.as_str())));
        obj.insert(String::from("payload"), self.payload.clone());
        serde_json::from_value(Value::Object(obj)).map_err(|e| CaseError::Encoding(format!("{e}")))
    }
}

/// Rebuilds a case from its audit log, checking sequence numbers, digests
/// and the legality of every transition. The first offending entry is named
/// in the error.
pub fn replay(entries: &[AuditEntry]) -> Result<CaseRecord, CaseError> {
    let mut case: Option<CaseRecord> = None;
    for (i, entry) in entries.iter().enumerate() {
        let expected = i as u64 + 1;
        let fail = |reason: String| CaseError::Integrity { seq: expected, reason };
        if entry.seq != expected {
            return Err(fail(format!("expected seq {expected}, found {}", entry.seq)));
        }
        if !entry.digest_matches() {
            return Err(fail(String::from("payload digest mismatch")));
        }
        let event = entry.decode().map_err(|e| fail(format!("{e}")))?;
        match case.as_mut() {
            None => {
                let CaseEvent::Submitted { application } = event else {
                    return Err(fail(format!("log starts with {} instead of submitted", entry.event)));
                };
                let mut record = CaseRecord::genesis(application).map_err(|e| fail(format!("{e}")))?;
                record.audit.push(entry.clone());
                case = Some(record);
            }
            Some(record) => {
                record.apply(&event).map_err(|e| fail(format!("{e}")))?;
                record.audit.push(entry.clone());
            }
        }
    }
    case.ok_or(CaseError::EmptyLog)
}

/// Serializes entries as JSON lines, one entry per line.
pub fn to_json_lines(entries: &[AuditEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("audit entry serializes"));
        out.push('\n');
    }
    out
}

/// Parses JSON lines written by [`to_json_lines`]; blank lines are skipped.
pub fn parse_json_lines(text: &str) -> Result<Vec<AuditEntry>, CaseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| CaseError::Encoding(format!("line {}: {e}", n + 1))))
        .collect()
}
