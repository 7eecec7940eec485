//! Classification by the General Interpretative Rules.
//!
//! [`classify`] runs the rules in their fixed order and records every rule
//! it tries as a [`GirStep`]:
//!
//! 1. candidate headings are scored by token overlap with the description;
//! 2. GIR 1 applies the terms of the headings and the section/chapter notes
//!    (exclusions drop candidates and redirect to another heading);
//! 3. GIR 2(a) keeps the complete-article heading for unassembled or
//!    incomplete goods, GIR 2(b) widens the field for multi-material goods;
//! 4. GIR 3 breaks ties by specificity (a), essential character (b), and
//!    finally the numerically last heading (c);
//! 5. GIR 4 falls back to the most akin heading above a lower threshold;
//! 6. GIR 5 records how the packaging is treated (it never changes the code);
//! 7. GIR 6 descends the subheading tree, comparing only siblings.
//!
//! Essential character is read from the `essential_character`, `materials`
//! and `assembly_state` attributes; it is never inferred from free text.
//! The engine never reads `claimed_code`.

mod candidates;
mod rules;
mod subheading;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::hs::HsCode;
use crate::intake::LineItem;
use crate::kb::KnowledgeBase;

pub use candidates::{
    candidate_headings, essential_matches, score_text, score_tokens, CandidateScore, EssentialMatch,
};
pub(crate) use candidates::score_tokens_with;
pub use rules::{apply_gir1, apply_gir2, apply_gir3, apply_gir4, apply_gir5, Candidate, Decision, RuleOutput, Stage};
pub use subheading::{apply_gir6, SubheadingOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GirRule {
    #[serde(rename = "GIR1")]
    Gir1,
    #[serde(rename = "GIR2a")]
    Gir2a,
    #[serde(rename = "GIR2b")]
    Gir2b,
    #[serde(rename = "GIR3a")]
    Gir3a,
    #[serde(rename = "GIR3b")]
    Gir3b,
    #[serde(rename = "GIR3c")]
    Gir3c,
    #[serde(rename = "GIR4")]
    Gir4,
    #[serde(rename = "GIR5a")]
    Gir5a,
    #[serde(rename = "GIR5b")]
    Gir5b,
    #[serde(rename = "GIR6")]
    Gir6,
}

impl GirRule {
    /// Human name, e.g. `GIR 3(b)`.
    pub fn name(self) -> &'static str {
        match self {
            GirRule::Gir1 => "GIR 1",
            GirRule::Gir2a => "GIR 2(a)",
            GirRule::Gir2b => "GIR 2(b)",
            GirRule::Gir3a => "GIR 3(a)",
            GirRule::Gir3b => "GIR 3(b)",
            GirRule::Gir3c => "GIR 3(c)",
            GirRule::Gir4 => "GIR 4",
            GirRule::Gir5a => "GIR 5(a)",
            GirRule::Gir5b => "GIR 5(b)",
            GirRule::Gir6 => "GIR 6",
        }
    }

    pub fn is_gir5(self) -> bool {
        matches!(self, GirRule::Gir5a | GirRule::Gir5b)
    }
}

impl fmt::Display for GirRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rule application in the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GirStep {
    pub rule: GirRule,
    pub justification: String,
    pub cited_notes: Vec<String>,
    pub candidates_before: Vec<HsCode>,
    pub candidates_after: Vec<HsCode>,
    /// This step settled the heading (or subheading, for GIR 6).
    #[serde(default)]
    pub decided: bool,
    /// The step asks for an officer to look at the item.
    #[serde(default)]
    pub needs_review: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    /// Absent when the goods could not be classified.
    pub code: Option<HsCode>,
    pub trace: Vec<GirStep>,
    pub confidence: f64,
    pub evidence_incomplete: bool,
    /// Set by a reusable-container GIR 5 step or by conflicting notes.
    #[serde(default)]
    pub needs_review: bool,
    /// Attributes some note needed but the item lacked.
    #[serde(default)]
    pub missing_attributes: Vec<String>,
    /// Rule that settled the heading.
    pub deciding_rule: Option<GirRule>,
    /// The heading decision came from a legal note.
    #[serde(default)]
    pub decided_by_note: bool,
}

impl ClassificationResult {
    pub fn heading(&self) -> Option<&str> {
        self.code.as_ref().map(HsCode::heading)
    }

    /// Every note id cited anywhere in the trace, in first-cited order.
    pub fn cited_notes(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.trace
            .iter()
            .flat_map(|s| s.cited_notes.iter())
            .filter(|id| seen.insert(id.as_str()))
            .map(String::as_str)
            .collect()
    }
}

/// Engine thresholds and the confidence policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Fraction of item tokens a heading must match to be accepted outright.
    pub accept_threshold: f64,
    /// Lower bar for GIR 4 ("most akin").
    pub akin_threshold: f64,
    /// Added to a heading's score when a legal note sends goods there.
    pub note_boost: f64,
    pub gir3c_cap: f64,
    pub gir4_cap: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { accept_threshold: 0.5, akin_threshold: 0.25, note_boost: 0.4, gir3c_cap: 0.5, gir4_cap: 0.3 }
    }
}

#[derive(Debug, Default)]
pub(crate) struct Flags {
    pub evidence_incomplete: bool,
    pub needs_review: bool,
    pub missing: BTreeSet<String>,
}

impl Flags {
    fn absorb(&mut self, out: &RuleOutput) {
        self.evidence_incomplete |= out.evidence_incomplete;
        self.needs_review |= out.needs_review;
        self.missing.extend(out.missing.iter().cloned());
    }
}

/// Classifies `item` with lexical candidate scoring.
pub fn classify(kb: &KnowledgeBase, item: &LineItem, config: &EngineConfig) -> ClassificationResult {
    classify_with_candidates(kb, item, &candidate_headings(kb, item), config)
}

/// Classifies `item` from a precomputed candidate ranking (for example the
/// output of a semantic re-ranker).
pub fn classify_with_candidates(
    kb: &KnowledgeBase,
    item: &LineItem,
    candidates: &[CandidateScore],
    config: &EngineConfig,
) -> ClassificationResult {
    let mut trace = Vec::new();
    let mut flags = Flags::default();

    let gir1 = apply_gir1(kb, item, candidates, config);
    flags.absorb(&gir1);
    trace.extend(gir1.steps);
    let excluded = gir1.excluded;

    let decision = match gir1.stage {
        Stage::Decided(d) => Some(d),
        Stage::Continue { pool, active } => {
            let gir2 = apply_gir2(kb, item, &pool, active, &excluded);
            flags.absorb(&gir2);
            trace.extend(gir2.steps);
            match gir2.stage {
                Stage::Decided(d) => Some(d),
                Stage::Continue { active, .. } if !active.is_empty() => {
                    let gir3 = apply_gir3(kb, item, &active, config);
                    trace.extend(gir3.steps);
                    match gir3.stage {
                        Stage::Decided(d) => Some(d),
                        Stage::Continue { .. } => None,
                    }
                }
                Stage::Continue { pool, .. } => {
                    let (decision, step) = apply_gir4(&pool, config);
                    trace.push(step);
                    decision
                }
            }
        }
    };

    let Some(decision) = decision else {
        return ClassificationResult {
            code: None,
            trace,
            confidence: 0.0,
            evidence_incomplete: flags.evidence_incomplete,
            needs_review: flags.needs_review,
            missing_attributes: flags.missing.into_iter().collect(),
            deciding_rule: None,
            decided_by_note: false,
        };
    };

    if let Some(step) = apply_gir5(item, &decision.code) {
        flags.needs_review |= step.needs_review;
        trace.push(step);
    }

    let sub = apply_gir6(kb, item, &decision.code);
    flags.evidence_incomplete |= sub.evidence_incomplete;
    flags.needs_review |= sub.needs_review;
    flags.missing.extend(sub.missing.iter().cloned());
    trace.extend(sub.steps);

    ClassificationResult {
        code: Some(sub.code),
        trace,
        confidence: decision.confidence.clamp(0.0, 1.0),
        evidence_incomplete: flags.evidence_incomplete,
        needs_review: flags.needs_review,
        missing_attributes: flags.missing.into_iter().collect(),
        deciding_rule: Some(decision.rule),
        decided_by_note: decision.by_note,
    }
}
