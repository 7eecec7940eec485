use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::KnowledgeBase;
use crate::attrs::Attributes;
use crate::condition::{eval_condition, EvalOutcome, NoteCondition};
use crate::hs::HsCode;

#[derive(Debug, Clone, PartialEq)]
pub struct ExemptionEntry {
    pub prefix: HsCode,
    pub condition: Option<NoteCondition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExemptionList {
    pub id: String,
    pub source: String,
    pub entries: Vec<ExemptionEntry>,
}

/// Eligibility of a code under the exemption lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExemptionStatus {
    Eligible { list_id: String, prefix: HsCode },
    Ineligible,
    /// The matching entry carries a condition; `outcome` is its evaluation.
    Conditional { list_id: String, prefix: HsCode, outcome: ConditionalOutcome },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalOutcome {
    pub matched: bool,
    pub evidence_incomplete: bool,
    pub missing: Vec<String>,
}

impl From<EvalOutcome> for ConditionalOutcome {
    fn from(o: EvalOutcome) -> Self {
        Self { matched: o.matched, evidence_incomplete: o.undetermined, missing: o.missing }
    }
}

impl ExemptionStatus {
    /// Eligible outright, or conditionally with the condition satisfied.
    pub fn is_eligible(&self) -> bool {
        match self {
            ExemptionStatus::Eligible { .. } => true,
            ExemptionStatus::Conditional { outcome, .. } => outcome.matched,
            ExemptionStatus::Ineligible => false,
        }
    }

    /// A condition could not be decided for lack of attributes.
    pub fn is_undetermined(&self) -> bool {
        matches!(self, ExemptionStatus::Conditional { outcome, .. } if outcome.evidence_incomplete)
    }

    pub fn list_id(&self) -> Option<&str> {
        match self {
            ExemptionStatus::Eligible { list_id, .. } | ExemptionStatus::Conditional { list_id, .. } => Some(list_id),
            ExemptionStatus::Ineligible => None,
        }
    }
}

impl KnowledgeBase {
    /// Longest-prefix lookup across all exemption lists. Lists are scanned in
    /// id order, so on equal prefix length the first list wins. No match is
    /// `Ineligible`.
    pub fn exemption_status(&self, code: &HsCode, attrs: &Attributes) -> ExemptionStatus {
        let best = self
            .exemptions
            .values()
            .flat_map(|list| list.entries.iter().map(move |e| (list, e)))
            .filter(|(_, e)| e.prefix.is_prefix_of(code))
            .fold(None::<(&ExemptionList, &ExemptionEntry)>, |best, cand| match best {
                Some(b) if b.1.prefix.len() >= cand.1.prefix.len() => Some(b),
                _ => Some(cand),
            });
        match best {
            None => ExemptionStatus::Ineligible,
            Some((list, entry)) => match &entry.condition {
                None => ExemptionStatus::Eligible { list_id: list.id.clone(), prefix: entry.prefix.clone() },
                Some(cond) => ExemptionStatus::Conditional {
                    list_id: list.id.clone(),
                    prefix: entry.prefix.clone(),
                    outcome: eval_condition(cond, attrs).into(),
                },
            },
        }
    }
}
