//! Line-by-line verification of claimed HS codes.
//!
//! Each item is classified by the GIR engine and the result is compared
//! with the claimed code at heading level:
//!
//! | engine outcome                                   | status        |
//! |--------------------------------------------------|---------------|
//! | undetermined, incomplete evidence, review marker | `NeedsReview` |
//! | no claimed code, or a different heading          | `Discrepancy` |
//! | same heading, claimed code exempt                | `Verified`    |
//! | same heading, exemption condition undetermined   | `NeedsReview` |
//! | same heading, not exempt                         | `Ineligible`  |
//!
//! A different subheading under the same heading does not change the
//! status; it sets [`Finding::subheading_mismatch`].

mod explain;
mod tier;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::gir::{candidate_headings, classify_with_candidates, ClassificationResult, EngineConfig, GirStep};
use crate::hs::HsCode;
use crate::intake::{Application, LineItem};
use crate::kb::{ExemptionStatus, KnowledgeBase, LegalNote};

pub use explain::{explain, render_report_text};
pub use tier::{
    merge_max, tiered_rank, AdapterError, SemanticAdapter, SemanticRanking, SynonymAdapter, Tier, TieredRanking,
};

/// Longest note excerpt quoted in a citation, in characters.
const EXCERPT_CHARS: usize = 240;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Verified,
    Discrepancy,
    Ineligible,
    NeedsReview,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Verified, Status::Discrepancy, Status::Ineligible, Status::NeedsReview];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Verified => "Verified",
            Status::Discrepancy => "Discrepancy",
            Status::Ineligible => "Ineligible",
            Status::NeedsReview => "NeedsReview",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A legal note quoted in a finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub note_id: String,
    pub label: String,
    pub excerpt: String,
    pub citation_uri: String,
}

impl Citation {
    pub fn from_note(note: &LegalNote) -> Self {
        Self {
            note_id: note.id.clone(),
            label: String::from(note.display_label()),
            excerpt: excerpt(&note.source_text),
            citation_uri: note.citation_uri.clone(),
        }
    }
}

fn excerpt(text: &str) -> String {
    let text = text.trim();
    match text.char_indices().nth(EXCERPT_CHARS) {
        None => String::from(text),
        Some((cut, _)) => format!("{}...", text[..cut].trim_end()),
    }
}

/// The four explanation blocks shown for each item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingBlocks {
    #[serde(rename = "Issue")]
    pub issue: String,
    #[serde(rename = "Relevant Rule/Note")]
    pub relevant_rule: String,
    #[serde(rename = "Suggested Classification")]
    pub suggested_classification: String,
    #[serde(rename = "Reasoning")]
    pub reasoning: String,
}

/// The verdict for one line item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub item_index: u32,
    pub status: Status,
    pub claimed_code: Option<HsCode>,
    pub suggested: Option<ClassificationResult>,
    pub blocks: FindingBlocks,
    pub explanation: String,
    pub citations: Vec<Citation>,
    pub confidence: f64,
    /// Exemption status of the claimed code.
    pub claimed_exemption: Option<ExemptionStatus>,
    /// Exemption status of the suggested code, for correction guidance.
    pub suggested_exemption: Option<ExemptionStatus>,
    /// Same heading as suggested but a different subheading.
    #[serde(default)]
    pub subheading_mismatch: bool,
    pub tier: Tier,
    /// Why the item needs an officer, when `status` is `NeedsReview`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub review_reasons: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_attributes: Vec<String>,
    /// Extraction confidence per field, as reported at intake. Display only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub field_confidence: BTreeMap<String, f64>,
}

impl Finding {
    pub fn suggested_code(&self) -> Option<&HsCode> {
        self.suggested.as_ref().and_then(|s| s.code.as_ref())
    }

    pub fn suggested_heading(&self) -> Option<&str> {
        self.suggested_code().map(HsCode::heading)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(rename = "Verified")]
    pub verified: usize,
    #[serde(rename = "Discrepancy")]
    pub discrepancy: usize,
    #[serde(rename = "Ineligible")]
    pub ineligible: usize,
    #[serde(rename = "NeedsReview")]
    pub needs_review: usize,
    pub total: usize,
}

impl Summary {
    pub fn of(findings: &[Finding]) -> Self {
        let mut s = Summary { total: findings.len(), ..Summary::default() };
        for f in findings {
            *s.count_mut(f.status) += 1;
        }
        s
    }

    pub fn count(&self, status: Status) -> usize {
        match status {
            Status::Verified => self.verified,
            Status::Discrepancy => self.discrepancy,
            Status::Ineligible => self.ineligible,
            Status::NeedsReview => self.needs_review,
        }
    }

    fn count_mut(&mut self, status: Status) -> &mut usize {
        match status {
            Status::Verified => &mut self.verified,
            Status::Discrepancy => &mut self.discrepancy,
            Status::Ineligible => &mut self.ineligible,
            Status::NeedsReview => &mut self.needs_review,
        }
    }
}

/// The consolidated report for one application revision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub app_id: String,
    pub revision: u32,
    pub kb_version: String,
    pub findings: Vec<Finding>,
    pub summary: Summary,
}

impl VerificationReport {
    /// Builds a report from per-item findings (in any order).
    pub fn assemble(app: &Application, kb: &KnowledgeBase, mut findings: Vec<Finding>) -> Self {
        findings.sort_by_key(|f| f.item_index);
        Self {
            app_id: app.app_id.clone(),
            revision: app.revision,
            kb_version: String::from(kb.version().as_str()),
            summary: Summary::of(&findings),
            findings,
        }
    }

    pub fn finding(&self, item_index: u32) -> Option<&Finding> {
        self.findings.iter().find(|f| f.item_index == item_index)
    }

    /// True when some item is not `Verified`.
    pub fn has_findings(&self) -> bool {
        self.findings.iter().any(|f| f.status != Status::Verified)
    }

    /// Canonical JSON: repeated calls on equal reports give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes")
    }
}

/// Tunables for verification.
#[derive(Clone, Copy)]
pub struct VerifyOptions<'a> {
    pub engine: EngineConfig,
    /// Top lexical score at or above which the semantic tier is skipped.
    pub tier_threshold: f64,
    /// `None` uses a [`SynonymAdapter`] over the KB synonym table.
    pub adapter: Option<&'a dyn SemanticAdapter>,
}

impl Default for VerifyOptions<'_> {
    fn default() -> Self {
        Self { engine: EngineConfig::default(), tier_threshold: 0.6, adapter: None }
    }
}

impl core::fmt::Debug for VerifyOptions<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("VerifyOptions")
            .field("engine", &self.engine)
            .field("tier_threshold", &self.tier_threshold)
            .field("adapter", &self.adapter.map(|a| a.name()))
            .finish()
    }
}

/// Verifies one item with default options.
pub fn verify_item(kb: &KnowledgeBase, item: &LineItem) -> Finding {
    verify_item_with(kb, item, &VerifyOptions::default())
}

pub fn verify_item_with(kb: &KnowledgeBase, item: &LineItem, options: &VerifyOptions<'_>) -> Finding {
    let synonyms;
    let adapter: &dyn SemanticAdapter = match options.adapter {
        Some(a) => a,
        None => {
            synonyms = SynonymAdapter::from_kb(kb);
            &synonyms
        }
    };
    let ranking = tiered_rank(kb, &item.description, candidate_headings(kb, item), options.tier_threshold, adapter);
    let mut result = classify_with_candidates(kb, item, &ranking.scores, &options.engine);
    result.evidence_incomplete |= ranking.evidence_incomplete;
    build_finding(kb, item, result, &ranking)
}

/// Verifies every item, in item-index order, with default options.
pub fn verify_application(kb: &KnowledgeBase, app: &Application) -> VerificationReport {
    verify_application_with(kb, app, &VerifyOptions::default())
}

pub fn verify_application_with(kb: &KnowledgeBase, app: &Application, options: &VerifyOptions<'_>) -> VerificationReport {
    let findings = app.items.iter().map(|item| attach_confidence(app, verify_item_with(kb, item, options))).collect();
    VerificationReport::assemble(app, kb, findings)
}

/// Copies the intake field confidence for the finding's item.
pub fn attach_confidence(app: &Application, mut finding: Finding) -> Finding {
    if let Some(c) = app.field_confidence.get(&finding.item_index) {
        finding.field_confidence = c.clone();
    }
    finding
}

fn review_steps(result: &ClassificationResult) -> impl Iterator<Item = &GirStep> {
    result.trace.iter().filter(|s| s.needs_review)
}

fn build_finding(kb: &KnowledgeBase, item: &LineItem, result: ClassificationResult, ranking: &TieredRanking) -> Finding {
    let mut reasons: Vec<String> = Vec::new();
    let mut missing: BTreeSet<String> = result.missing_attributes.iter().cloned().collect();
    if result.code.is_none() {
        reasons.push(String::from("the goods could not be classified under any heading"));
    }
    if let Some(err) = &ranking.error {
        reasons.push(format!("semantic ranking was unavailable ({err})"));
    }
    if result.evidence_incomplete && ranking.error.is_none() {
        if missing.is_empty() {
            reasons.push(String::from("the subheading could not be determined from the description"));
        } else {
            reasons.push(format!(
                "evidence is incomplete: missing attributes {}",
                missing.iter().cloned().collect::<Vec<_>>().join(", ")
            ));
        }
    }
    for s in review_steps(&result) {
        reasons.push(format!("{}: {}", s.rule.name(), s.justification));
    }

    let claimed = item.claimed_code.clone();
    let suggested_code = result.code.clone();
    let claimed_exemption = claimed.as_ref().map(|c| kb.exemption_status(c, &item.attributes));
    let suggested_exemption = suggested_code.as_ref().map(|c| kb.exemption_status(c, &item.attributes));

    let same_heading = match (&claimed, &suggested_code) {
        (Some(c), Some(s)) => c.heading() == s.heading(),
        _ => false,
    };
    let status = if !reasons.is_empty() {
        Status::NeedsReview
    } else if !same_heading {
        Status::Discrepancy
    } else {
        match claimed_exemption.as_ref().expect("claimed code present") {
            e if e.is_eligible() => Status::Verified,
            e if e.is_undetermined() => {
                if let ExemptionStatus::Conditional { outcome, list_id, .. } = e {
                    missing.extend(outcome.missing.iter().cloned());
                    reasons.push(format!(
                        "the condition of exemption list {list_id} cannot be evaluated: missing attributes {}",
                        outcome.missing.join(", ")
                    ));
                }
                Status::NeedsReview
            }
            _ => Status::Ineligible,
        }
    };
    let subheading_mismatch = same_heading
        && match (claimed.as_ref().and_then(HsCode::subheading), suggested_code.as_ref().and_then(HsCode::subheading)) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        };

    let mut cited: Vec<Citation> = Vec::new();
    for id in result.cited_notes() {
        if let Some(note) = kb.note(id) {
            cited.push(Citation::from_note(note));
        }
    }

    let blocks = explain::blocks(kb, status, claimed.as_ref(), &result, claimed_exemption.as_ref(), &reasons);
    let mut finding = Finding {
        item_index: item.index,
        status,
        claimed_code: claimed,
        confidence: if result.code.is_some() { result.confidence } else { 0.0 },
        suggested: Some(result),
        blocks,
        explanation: String::new(),
        citations: cited,
        claimed_exemption,
        suggested_exemption,
        subheading_mismatch,
        tier: ranking.tier,
        review_reasons: if status == Status::NeedsReview { reasons } else { Vec::new() },
        missing_attributes: missing.into_iter().collect(),
        field_confidence: BTreeMap::new(),
    };
    finding.explanation = explain(&finding);
    finding
}

#[cfg(test)]
mod tests;
