//! GIR 6: descent through the subheading tree.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::candidates::terms_tokens;
use super::{GirRule, GirStep};
use crate::condition::eval_condition;
use crate::hs::HsCode;
use crate::intake::LineItem;
use crate::kb::{KnowledgeBase, NoteKind, Subheading};
use crate::text::tokens;

#[derive(Debug, Clone, PartialEq)]
pub struct SubheadingOutcome {
    /// The deepest code reached; the heading itself when it has no subheadings.
    pub code: HsCode,
    /// One step per level descended.
    pub steps: Vec<GirStep>,
    /// Descent stopped early because no sibling could be chosen.
    pub evidence_incomplete: bool,
    pub needs_review: bool,
    pub missing: Vec<String>,
}

/// Walks down from `heading`, comparing only siblings at each level.
///
/// At each level a subheading note redirecting to one of the siblings
/// decides; otherwise the sibling whose terms match the most description
/// tokens wins, ties going to the last in numerical order; when nothing
/// matches, the residual ("other") sibling is taken, and a lone sibling is
/// taken as is. If none of these applies, descent stops at the current code
/// with `evidence_incomplete` set.
pub fn apply_gir6(kb: &KnowledgeBase, item: &LineItem, heading: &HsCode) -> SubheadingOutcome {
    let mut out = SubheadingOutcome {
        code: heading.heading_code(),
        steps: Vec::new(),
        evidence_incomplete: false,
        needs_review: false,
        missing: Vec::new(),
    };
    let Some(h) = kb.heading(heading) else {
        return out;
    };
    let item_tokens = tokens(&item.description);
    let notes = kb.subheading_notes(&h.code);
    let mut missing = BTreeSet::new();
    let mut parent: Option<HsCode> = None;

    loop {
        let children: Vec<&Subheading> = h.children_of(parent.as_ref());
        if children.is_empty() {
            break;
        }
        let before: Vec<HsCode> = children.iter().map(|s| s.code.clone()).collect();
        let mut cited = Vec::new();

        let mut redirected: Vec<(&HsCode, &str)> = Vec::new();
        for note in &notes {
            if note.kind == NoteKind::Definition {
                continue;
            }
            let target = match note.redirect.as_ref().and_then(|r| r.code()) {
                Some(t) if before.contains(t) => t,
                _ => continue,
            };
            let outcome = eval_condition(&note.condition, &item.attributes);
            if outcome.undetermined {
                out.evidence_incomplete = true;
                missing.extend(outcome.missing);
            }
            if outcome.matched {
                redirected.push((target, note.display_label()));
                cited.push(note.id.clone());
            }
        }
        let distinct: BTreeSet<&HsCode> = redirected.iter().map(|(t, _)| *t).collect();

        let choice: Option<(HsCode, String)> = if let Some((target, label)) = redirected.first() {
            if distinct.len() > 1 {
                out.needs_review = true;
            }
            Some(((*target).clone(), format!("{label} sends the goods to subheading {target}.")))
        } else {
            let counts: Vec<(usize, &Subheading)> = children
                .iter()
                .map(|s| (terms_tokens(&s.terms).intersection(&item_tokens).count(), *s))
                .collect();
            let max = counts.iter().map(|(n, _)| *n).max().unwrap_or(0);
            let top: Vec<&Subheading> = counts.iter().filter(|(n, _)| *n == max).map(|(_, s)| *s).collect();
            if max > 0 && top.len() == 1 {
                Some((
                    top[0].code.clone(),
                    format!("Among subheadings {}, {} is the most specific ({max} matching token(s)).", list(&before), top[0].code),
                ))
            } else if max > 0 {
                let last = top.iter().max_by_key(|s| s.code.numeric()).expect("non-empty");
                Some((
                    last.code.clone(),
                    format!(
                        "Subheadings {} are equally specific; {} occurs last in numerical order.",
                        list(&top.iter().map(|s| s.code.clone()).collect::<Vec<_>>()),
                        last.code
                    ),
                ))
            } else if let Some(residual) = children.iter().find(|s| s.is_residual) {
                Some((
                    residual.code.clone(),
                    format!(
                        "No subheading among {} describes the goods more specifically; the residual subheading {} applies.",
                        list(&before),
                        residual.code
                    ),
                ))
            } else if children.len() == 1 {
                Some((children[0].code.clone(), format!("Subheading {} is the only subheading at this level.", children[0].code)))
            } else {
                None
            }
        };

        let Some((code, justification)) = choice else {
            out.evidence_incomplete = true;
            break;
        };
        out.steps.push(GirStep {
            rule: GirRule::Gir6,
            justification,
            cited_notes: cited,
            candidates_before: before,
            candidates_after: alloc::vec![code.clone()],
            decided: true,
            needs_review: distinct.len() > 1,
        });
        out.code = code.clone();
        parent = Some(code);
    }
    out.missing = missing.into_iter().collect();
    out
}

fn list(codes: &[HsCode]) -> String {
    codes.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(", ")
}
