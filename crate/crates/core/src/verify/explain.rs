//! Template-rendered explanations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Finding, FindingBlocks, Status, VerificationReport};
use crate::gir::{ClassificationResult, GirRule, GirStep};
use crate::hs::HsCode;
use crate::kb::{ExemptionStatus, KnowledgeBase, LegalNote};

fn deciding_step(result: &ClassificationResult) -> Option<&GirStep> {
    let rule = result.deciding_rule?;
    result.trace.iter().find(|s| s.rule == rule && s.decided)
}

/// Notes that sent the goods to the suggested heading.
fn deciding_notes<'k>(kb: &'k KnowledgeBase, result: &ClassificationResult) -> Vec<&'k LegalNote> {
    let (Some(step), Some(code)) = (deciding_step(result), result.code.as_ref()) else {
        return Vec::new();
    };
    if !result.decided_by_note {
        return Vec::new();
    }
    step.cited_notes
        .iter()
        .filter_map(|id| kb.note(id))
        .filter(|n| n.redirect.as_ref().and_then(|r| r.code()).is_some_and(|t| t.heading() == code.heading()))
        .collect()
}

fn heading_display(code: &HsCode) -> String {
    format!("{}", code.heading_code())
}

fn rule_name(result: &ClassificationResult) -> &'static str {
    result.deciding_rule.map_or("GIR 1", GirRule::name)
}

fn exemption_sentence(e: &ExemptionStatus) -> String {
    match e {
        ExemptionStatus::Eligible { list_id, prefix } => {
            format!("eligible under exemption list {list_id} (entry {prefix})")
        }
        ExemptionStatus::Conditional { list_id, prefix, outcome } if outcome.matched => {
            format!("eligible under exemption list {list_id} (entry {prefix}, condition met)")
        }
        ExemptionStatus::Conditional { list_id, prefix, outcome } if outcome.evidence_incomplete => {
            format!("conditionally listed in {list_id} (entry {prefix}); the condition cannot be evaluated")
        }
        ExemptionStatus::Conditional { list_id, prefix, .. } => {
            format!("listed in {list_id} (entry {prefix}) but its condition is not met")
        }
        ExemptionStatus::Ineligible => String::from("not on any exemption list"),
    }
}

/// Builds the Issue / Relevant Rule/Note / Suggested Classification /
/// Reasoning blocks.
pub(super) fn blocks(
    kb: &KnowledgeBase,
    status: Status,
    claimed: Option<&HsCode>,
    result: &ClassificationResult,
    claimed_exemption: Option<&ExemptionStatus>,
    reasons: &[String],
) -> FindingBlocks {
    let notes = deciding_notes(kb, result);
    let rule = rule_name(result);

    let issue = match (status, claimed, result.code.as_ref()) {
        (Status::NeedsReview, _, _) => format!("Officer review required: {}.", reasons.join("; ")),
        (Status::Discrepancy, None, _) => String::from("No HS code was claimed for this item."),
        (Status::Discrepancy, Some(c), Some(s)) if c.chapter() != s.chapter() => {
            format!("Potential misclassification if claimed under Chapter {}.", c.chapter())
        }
        (Status::Discrepancy, Some(c), _) => format!("Potential misclassification if claimed under {}.", heading_display(c)),
        (Status::Verified, Some(c), _) => format!(
            "None. The claimed code {c} agrees with the suggested classification and is {}.",
            claimed_exemption.map(exemption_sentence).unwrap_or_default()
        ),
        (Status::Ineligible, Some(c), _) => format!(
            "The claimed code {c} agrees with the suggested classification but is {}.",
            claimed_exemption.map(exemption_sentence).unwrap_or_default()
        ),
        (_, None, _) => String::from("No HS code was claimed for this item."),
    };

    let relevant_rule = if !notes.is_empty() {
        notes
            .iter()
            .map(|n| format!("{}: '{}'", n.display_label(), super::excerpt(&n.source_text)))
            .collect::<Vec<_>>()
            .join("; ")
    } else if let Some(code) = result.code.as_ref() {
        let label = kb.heading(code).map_or("", |h| h.label());
        format!("Terms of heading {} ({label})", heading_display(code))
    } else {
        String::from("None")
    };

    let suggested_classification = match result.code.as_ref() {
        Some(code) => {
            let label = kb.heading(code).map_or("", |h| h.label());
            format!("Heading {} ({label}). Application of {rule}", heading_display(code))
        }
        None => String::from("None. The goods could not be classified."),
    };

    let reasoning = match (notes.is_empty(), deciding_step(result)) {
        (false, _) => {
            let mut text: Vec<String> = notes
                .iter()
                .map(|n| match &n.rationale {
                    Some(r) => String::from(r.trim()),
                    None => format!(
                        "{} sends the goods to heading {}.",
                        n.display_label(),
                        n.redirect.as_ref().and_then(|r| r.code()).map(heading_display).unwrap_or_default()
                    ),
                })
                .collect();
            text.push(format!("Application of {rule}."));
            text.join(" ")
        }
        (true, Some(step)) => format!("{} Application of {rule}.", step.justification),
        (true, None) => result
            .trace
            .last()
            .map_or_else(|| String::from("No rule applied."), |s| s.justification.clone()),
    };

    FindingBlocks { issue, relevant_rule, suggested_classification, reasoning }
}

/// Renders the full explanation of a finding. Deterministic: equal findings
/// render to equal text.
pub fn explain(finding: &Finding) -> String {
    let mut out = String::new();
    let status_sentence = match finding.status {
        Status::Verified => "Verified: the claimed code is confirmed and eligible for exemption.",
        Status::Discrepancy => "Discrepancy: the claimed code differs from the suggested classification.",
        Status::Ineligible => "Ineligible: the claimed code is confirmed but not eligible for exemption.",
        Status::NeedsReview => "Needs review: the item cannot be settled automatically.",
    };
    let _ = writeln!(out, "Item {}. {status_sentence}", finding.item_index);
    let claimed = finding.claimed_code.as_ref().map_or_else(|| String::from("none"), |c| format!("{c}"));
    let suggested = finding.suggested_code().map_or_else(|| String::from("none"), |c| format!("{c}"));
    let _ = writeln!(out, "Claimed code: {claimed}");
    let _ = writeln!(out, "Suggested code: {suggested}");
    if finding.subheading_mismatch {
        let _ = writeln!(out, "Note: the heading agrees but the subheading differs.");
    }
    let b = &finding.blocks;
    let _ = writeln!(out, "Issue: {}", b.issue);
    let _ = writeln!(out, "Relevant Rule/Note: {}", b.relevant_rule);
    let _ = writeln!(out, "Suggested Classification: {}", b.suggested_classification);
    let _ = writeln!(out, "Reasoning: {}", b.reasoning);
    if let Some(e) = &finding.claimed_exemption {
        let _ = writeln!(out, "Exemption (claimed code): {}", exemption_sentence(e));
    }
    if let Some(e) = &finding.suggested_exemption {
        let _ = writeln!(out, "Exemption (suggested code): {}", exemption_sentence(e));
    }
    if !finding.missing_attributes.is_empty() {
        let _ = writeln!(out, "Missing attributes: {}", finding.missing_attributes.join(", "));
    }
    if let Some(result) = &finding.suggested {
        let _ = writeln!(out, "Rule trace:");
        for (i, step) in result.trace.iter().enumerate() {
            let notes = if step.cited_notes.is_empty() {
                String::new()
            } else {
                format!(" [notes: {}]", step.cited_notes.join(", "))
            };
            let _ = writeln!(out, "  {}. {}: {}{notes}", i + 1, step.rule.name(), step.justification);
        }
    }
    if !finding.citations.is_empty() {
        let _ = writeln!(out, "Citations:");
        for c in &finding.citations {
            let _ = writeln!(out, "  - {} ({}): \"{}\" <{}>", c.label, c.note_id, c.excerpt, c.citation_uri);
        }
    }
    let _ = write!(out, "Confidence: {:.2}", finding.confidence);
    out
}

/// Plain-text rendering of a whole report: a header, the summary, and one
/// explanation block per item.
pub fn render_report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Verification report for {} (revision {})", report.app_id, report.revision);
    let _ = writeln!(out, "Knowledge base version: {}", report.kb_version);
    let s = &report.summary;
    let _ = writeln!(
        out,
        "Summary: {} item(s); Verified {}, Discrepancy {}, Ineligible {}, NeedsReview {}",
        s.total, s.verified, s.discrepancy, s.ineligible, s.needs_review
    );
    for f in &report.findings {
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", f.explanation);
    }
    out
}
