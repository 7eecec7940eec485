//! GIR 1 to 5 at heading level.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::candidates::{essential_matches, score_text, CandidateScore};
use super::{EngineConfig, GirRule, GirStep};
use crate::attrs::AttrValue;
use crate::condition::eval_condition;
use crate::hs::HsCode;
use crate::intake::LineItem;
use crate::kb::{KnowledgeBase, LegalNote, NoteKind};

/// Assembly states that trigger GIR 2(a).
const INCOMPLETE_STATES: &[&str] = &["unassembled", "disassembled", "incomplete", "unfinished"];

/// Packaging kinds treated as GIR 5(a) cases and boxes.
const CASE_WORDS: &[&str] = &["case", "box", "holster", "sheath", "cabinet"];

/// A heading still in play, with its lexical and note-adjusted scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub code: HsCode,
    /// Lexical score from candidate scoring (0 for headings only reached by a note).
    pub score: f64,
    /// Number of item tokens the heading terms match.
    pub matched: usize,
    /// `score`, plus the note boost when a note sent the goods here.
    pub effective: f64,
    pub by_note: bool,
    /// Notes that sent the goods to this heading.
    pub cited: Vec<String>,
}

impl Candidate {
    fn from_score(c: &CandidateScore) -> Self {
        Self {
            code: c.heading.clone(),
            score: c.score,
            matched: c.matched_tokens.len(),
            effective: c.score,
            by_note: false,
            cited: Vec::new(),
        }
    }

    fn unscored(code: HsCode) -> Self {
        Self { code, score: 0.0, matched: 0, effective: 0.0, by_note: false, cited: Vec::new() }
    }
}

/// A settled heading.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub code: HsCode,
    pub rule: GirRule,
    pub confidence: f64,
    pub by_note: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Decided(Decision),
    /// `pool` holds every surviving heading (the GIR 4 field); `active` the
    /// headings still competing for GIR 3 (empty when none qualified).
    Continue { pool: Vec<Candidate>, active: Vec<Candidate> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutput {
    pub stage: Stage,
    pub steps: Vec<GirStep>,
    /// Headings removed by exclusion notes; never re-admitted later.
    pub excluded: BTreeSet<HsCode>,
    pub evidence_incomplete: bool,
    pub needs_review: bool,
    pub missing: Vec<String>,
}

impl RuleOutput {
    fn new(stage: Stage, steps: Vec<GirStep>) -> Self {
        Self {
            stage,
            steps,
            excluded: BTreeSet::new(),
            evidence_incomplete: false,
            needs_review: false,
            missing: Vec::new(),
        }
    }
}

fn codes(cands: &[Candidate]) -> Vec<HsCode> {
    cands.iter().map(|c| c.code.clone()).collect()
}

fn sort_candidates(cands: &mut [Candidate]) {
    cands.sort_by(|a, b| b.effective.total_cmp(&a.effective).then_with(|| a.code.cmp(&b.code)));
}

fn list(codes: &[HsCode]) -> String {
    if codes.is_empty() {
        return String::from("none");
    }
    codes.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(", ")
}

fn step(rule: GirRule, justification: String, before: Vec<HsCode>, after: Vec<HsCode>) -> GirStep {
    GirStep {
        rule,
        justification,
        cited_notes: Vec::new(),
        candidates_before: before,
        candidates_after: after,
        decided: false,
        needs_review: false,
    }
}

fn attr_text<'a>(item: &'a LineItem, key: &str) -> Option<&'a str> {
    item.attr(key).and_then(AttrValue::as_text).map(str::trim).filter(|s| !s.is_empty())
}

/// Notes that apply to each chapter among the candidates.
fn applicable_notes<'k>(kb: &'k KnowledgeBase, pool: &[Candidate]) -> (Vec<&'k LegalNote>, BTreeMap<String, BTreeSet<&'k str>>) {
    let chapters: BTreeSet<&str> = pool.iter().map(|c| c.code.chapter()).collect();
    let mut by_chapter = BTreeMap::new();
    let mut ordered: Vec<&LegalNote> = Vec::new();
    for ch in chapters {
        let notes = kb.chapter_notes(ch);
        by_chapter.insert(String::from(ch), notes.iter().map(|n| n.id.as_str()).collect());
        for n in notes {
            if !ordered.iter().any(|o| o.id == n.id) {
                ordered.push(n);
            }
        }
    }
    (ordered, by_chapter)
}

/// GIR 1: the terms of the headings and the section and chapter notes.
///
/// Each note applicable to some candidate's chapter is evaluated once.
/// A matching exclusion note removes every candidate in its scope except
/// its own redirect target; a redirect (from an exclusion or inclusion note)
/// brings the target heading in with its score raised by the note boost.
/// The heading is decided when exactly one candidate reaches the
/// acceptance threshold. Redirect conflicts (two exclusion notes sending
/// the goods to different headings, or a redirect to an excluded heading)
/// set `needs_review`.
pub fn apply_gir1(
    kb: &KnowledgeBase,
    item: &LineItem,
    candidates: &[CandidateScore],
    config: &EngineConfig,
) -> RuleOutput {
    let mut pool: Vec<Candidate> = candidates.iter().map(Candidate::from_score).collect();
    let before = codes(&pool);
    let (notes, by_chapter) = applicable_notes(kb, &pool);

    let mut excluded = BTreeSet::new();
    let mut redirects: Vec<(HsCode, &LegalNote)> = Vec::new();
    let mut fired: Vec<&LegalNote> = Vec::new();
    let mut evidence_incomplete = false;
    let mut missing = BTreeSet::new();

    for note in notes {
        let outcome = eval_condition(&note.condition, &item.attributes);
        if outcome.undetermined {
            evidence_incomplete = true;
            missing.extend(outcome.missing.iter().cloned());
        }
        if !outcome.matched || note.kind == NoteKind::Definition {
            continue;
        }
        fired.push(note);
        let target = note.redirect.as_ref().and_then(|r| r.code()).map(HsCode::heading_code);
        if note.kind == NoteKind::Exclusion {
            for c in &pool {
                let in_scope = by_chapter.get(c.code.chapter()).is_some_and(|ids| ids.contains(note.id.as_str()));
                if in_scope && target.as_ref() != Some(&c.code) {
                    excluded.insert(c.code.clone());
                }
            }
        }
        if let Some(t) = target {
            redirects.push((t, note));
        }
    }

    let exclusion_targets: BTreeSet<&HsCode> =
        redirects.iter().filter(|(_, n)| n.kind == NoteKind::Exclusion).map(|(t, _)| t).collect();
    let mut needs_review = exclusion_targets.len() > 1;
    let mut conflicts = Vec::new();
    if needs_review {
        conflicts.push(format!("matching notes send the goods to different headings ({})", list(&exclusion_targets.iter().map(|c| (*c).clone()).collect::<Vec<_>>())));
    }

    for (target, note) in &redirects {
        if excluded.contains(target) {
            needs_review = true;
            conflicts.push(format!("{} sends the goods to heading {target}, which another note excludes", note.display_label()));
            continue;
        }
        let entry = match pool.iter_mut().position(|c| c.code == *target) {
            Some(i) => &mut pool[i],
            None => {
                pool.push(Candidate::unscored(target.clone()));
                pool.last_mut().expect("just pushed")
            }
        };
        entry.by_note = true;
        entry.effective = (entry.score + config.note_boost).min(1.0);
        if !entry.cited.contains(&note.id) {
            entry.cited.push(note.id.clone());
        }
    }
    pool.retain(|c| !excluded.contains(&c.code));
    sort_candidates(&mut pool);

    let qualified: Vec<Candidate> = pool.iter().filter(|c| c.effective >= config.accept_threshold).cloned().collect();
    let cited: Vec<String> = fired.iter().map(|n| n.id.clone()).collect();

    let mut reasons: Vec<String> = Vec::new();
    if before.is_empty() {
        reasons.push(String::from("No heading terms match the description."));
    } else {
        reasons.push(format!("Heading terms match candidates {}.", list(&before)));
    }
    for note in &fired {
        let removed: Vec<HsCode> = before.iter().filter(|c| excluded.contains(*c)).cloned().collect();
        let target = note.redirect.as_ref().and_then(|r| r.code());
        let sentence = match (note.kind, target) {
            (NoteKind::Exclusion, Some(t)) if removed.is_empty() => {
                format!("{} applies and sends the goods to heading {}.", note.display_label(), t.heading_code())
            }
            (NoteKind::Exclusion, Some(t)) => format!(
                "{} excludes the goods from {} and sends them to heading {}.",
                note.display_label(),
                list(&removed),
                t.heading_code()
            ),
            (NoteKind::Exclusion, None) => {
                format!("{} excludes the goods from {}; they are classified elsewhere.", note.display_label(), list(&removed))
            }
            (_, Some(t)) => format!("{} includes the goods in heading {}.", note.display_label(), t.heading_code()),
            (_, None) => format!("{} applies.", note.display_label()),
        };
        reasons.push(sentence);
    }
    for c in conflicts {
        reasons.push(format!("Review needed: {c}."));
    }

    let (stage, after, decided) = if qualified.len() == 1 {
        let winner = &qualified[0];
        reasons.push(format!(
            "Heading {} is the only candidate reaching the acceptance threshold ({:.2}).",
            winner.code, winner.effective
        ));
        let decision = Decision {
            code: winner.code.clone(),
            rule: GirRule::Gir1,
            confidence: winner.effective,
            by_note: winner.by_note,
        };
        (Stage::Decided(decision), alloc::vec![winner.code.clone()], true)
    } else {
        if qualified.is_empty() {
            reasons.push(String::from("No candidate reaches the acceptance threshold."));
        } else {
            reasons.push(format!("Candidates {} all reach the acceptance threshold.", list(&codes(&qualified))));
        }
        let after = codes(&pool);
        (Stage::Continue { pool, active: qualified }, after, false)
    };

    let mut gir1 = step(GirRule::Gir1, reasons.join(" "), before, after);
    gir1.cited_notes = cited;
    gir1.decided = decided;
    gir1.needs_review = needs_review;
    RuleOutput {
        stage,
        steps: alloc::vec![gir1],
        excluded,
        evidence_incomplete,
        needs_review,
        missing: missing.into_iter().collect(),
    }
}

/// GIR 2: incomplete articles (a) and mixtures of materials (b).
///
/// 2(a) applies to items whose `assembly_state` is unassembled, disassembled,
/// incomplete or unfinished and which declare an `essential_character`: the
/// surviving heading that names the complete article is retained. 2(b)
/// applies when `materials` lists more than one material: each material's
/// best-scoring headings join the competition and GIR 3 takes over.
/// Excluded headings are never re-admitted.
pub fn apply_gir2(
    kb: &KnowledgeBase,
    item: &LineItem,
    pool: &[Candidate],
    active: Vec<Candidate>,
    excluded: &BTreeSet<HsCode>,
) -> RuleOutput {
    let mut pool = pool.to_vec();
    let mut active = active;
    let mut steps = Vec::new();

    let state = attr_text(item, "assembly_state").map(str::to_lowercase);
    let essential = attr_text(item, "essential_character");
    if let (Some(state), Some(essential)) = (state, essential) {
        if INCOMPLETE_STATES.contains(&state.as_str()) {
            let complete: BTreeSet<HsCode> = essential_matches(kb, essential, 1.0).into_iter().map(|m| m.heading).collect();
            let hits: Vec<Candidate> = pool.iter().filter(|c| complete.contains(&c.code)).cloned().collect();
            let before = codes(&pool);
            match hits.len() {
                1 => {
                    let winner = &hits[0];
                    let mut s = step(
                        GirRule::Gir2a,
                        format!(
                            "The goods are {state}; their essential character ({essential}) is that of the complete article of heading {}, so they are classified there as if complete.",
                            winner.code
                        ),
                        before,
                        alloc::vec![winner.code.clone()],
                    );
                    s.decided = true;
                    steps.push(s);
                    let decision = Decision {
                        code: winner.code.clone(),
                        rule: GirRule::Gir2a,
                        confidence: winner.effective,
                        by_note: false,
                    };
                    return RuleOutput::new(Stage::Decided(decision), steps);
                }
                0 => {
                    let after = before.clone();
                    steps.push(step(
                        GirRule::Gir2a,
                        format!(
                            "The goods are {state}, but no candidate heading names the complete article ({essential}); candidates are unchanged."
                        ),
                        before,
                        after,
                    ));
                }
                _ => {
                    let after = codes(&hits);
                    steps.push(step(
                        GirRule::Gir2a,
                        format!(
                            "The goods are {state}; headings {} each name the complete article ({essential}).",
                            list(&after)
                        ),
                        before,
                        after,
                    ));
                    active = hits;
                }
            }
        }
    }

    let materials: BTreeSet<String> = item
        .attr("materials")
        .map(|v| v.items().into_iter().map(|m| m.trim().to_lowercase()).filter(|m| !m.is_empty()).collect())
        .unwrap_or_default();
    if materials.len() > 1 {
        let before = codes(&active);
        let mut per_material = Vec::new();
        for material in &materials {
            let scored = score_text(kb, material);
            let top = scored.first().map(|s| s.score);
            let best: Vec<HsCode> = scored
                .into_iter()
                .take_while(|s| Some(s.score) == top)
                .map(|s| s.heading)
                .filter(|h| !excluded.contains(h))
                .collect();
            per_material.push(format!("{material}: {}", list(&best)));
            for code in best {
                if active.iter().any(|c| c.code == code) {
                    continue;
                }
                let entry = match pool.iter().find(|c| c.code == code) {
                    Some(c) => c.clone(),
                    None => {
                        let c = Candidate::unscored(code);
                        pool.push(c.clone());
                        c
                    }
                };
                active.push(entry);
            }
        }
        sort_candidates(&mut active);
        sort_candidates(&mut pool);
        let after = codes(&active);
        steps.push(step(
            GirRule::Gir2b,
            format!(
                "The goods combine several materials; the best heading for each material is considered ({}) and GIR 3 decides among {}.",
                per_material.join("; "),
                list(&after)
            ),
            before,
            after,
        ));
    }

    RuleOutput::new(Stage::Continue { pool, active }, steps)
}

/// GIR 3: specificity (a), essential character (b), last in numerical order (c).
///
/// Every sub-rule tried records a step; GIR 3(b) is tried only when an
/// `essential_character` is declared. GIR 3(c) always decides.
pub fn apply_gir3(kb: &KnowledgeBase, item: &LineItem, active: &[Candidate], config: &EngineConfig) -> RuleOutput {
    let mut steps = Vec::new();
    let before = codes(active);
    let Some(max) = active.iter().map(|c| c.matched).max() else {
        return RuleOutput::new(Stage::Continue { pool: Vec::new(), active: Vec::new() }, steps);
    };
    let tied: Vec<&Candidate> = active.iter().filter(|c| c.matched == max).collect();
    let decide = |c: &Candidate, rule: GirRule, confidence: f64| Decision {
        code: c.code.clone(),
        rule,
        confidence,
        by_note: false,
    };

    if tied.len() == 1 {
        let winner = tied[0];
        let mut s = step(
            GirRule::Gir3a,
            format!(
                "Heading {} gives the most specific description: its terms match {max} item token(s), more than any other candidate.",
                winner.code
            ),
            before,
            alloc::vec![winner.code.clone()],
        );
        s.decided = true;
        steps.push(s);
        return RuleOutput::new(Stage::Decided(decide(winner, GirRule::Gir3a, winner.effective)), steps);
    }
    let tied_codes: Vec<HsCode> = tied.iter().map(|c| c.code.clone()).collect();
    steps.push(step(
        GirRule::Gir3a,
        format!("Headings {} are equally specific ({max} matching token(s) each).", list(&tied_codes)),
        before,
        tied_codes.clone(),
    ));

    let essential = attr_text(item, "essential_character");
    if let Some(essential) = essential {
        let best: BTreeSet<HsCode> = essential_matches(kb, essential, 0.0).into_iter().map(|m| m.heading).collect();
        let hits: Vec<&Candidate> = tied.iter().copied().filter(|c| best.contains(&c.code)).collect();
        if hits.len() == 1 {
            let winner = hits[0];
            let mut s = step(
                GirRule::Gir3b,
                format!("The declared essential character ({essential}) points to heading {}.", winner.code),
                tied_codes,
                alloc::vec![winner.code.clone()],
            );
            s.decided = true;
            steps.push(s);
            return RuleOutput::new(Stage::Decided(decide(winner, GirRule::Gir3b, winner.effective)), steps);
        }
        steps.push(step(
            GirRule::Gir3b,
            format!("The declared essential character ({essential}) does not single out one of the tied headings."),
            tied_codes.clone(),
            tied_codes.clone(),
        ));
    }

    let winner = tied.iter().copied().max_by_key(|c| c.code.numeric()).expect("tied group is non-empty");
    let reason = if essential.is_none() { "no essential character is declared, so " } else { "" };
    let mut s = step(
        GirRule::Gir3c,
        format!("Among {}, {reason}heading {} is taken as it occurs last in numerical order.", list(&tied_codes), winner.code),
        tied_codes,
        alloc::vec![winner.code.clone()],
    );
    s.decided = true;
    steps.push(s);
    let confidence = winner.effective.min(config.gir3c_cap);
    RuleOutput::new(Stage::Decided(decide(winner, GirRule::Gir3c, confidence)), steps)
}

/// GIR 4: the heading for the most akin goods, if its score reaches the
/// akin threshold (inclusive). Otherwise the goods stay unclassified.
pub fn apply_gir4(pool: &[Candidate], config: &EngineConfig) -> (Option<Decision>, GirStep) {
    let mut pool = pool.to_vec();
    sort_candidates(&mut pool);
    let before = codes(&pool);
    match pool.first() {
        Some(best) if best.effective >= config.akin_threshold => {
            let mut s = step(
                GirRule::Gir4,
                format!(
                    "No heading qualifies outright; heading {} covers the most akin goods (score {:.2}).",
                    best.code, best.effective
                ),
                before,
                alloc::vec![best.code.clone()],
            );
            s.decided = true;
            let decision = Decision {
                code: best.code.clone(),
                rule: GirRule::Gir4,
                confidence: best.effective.min(config.gir4_cap),
                by_note: false,
            };
            (Some(decision), s)
        }
        Some(best) => (
            None,
            step(
                GirRule::Gir4,
                format!(
                    "The closest heading ({}, score {:.2}) is below the akin threshold; the goods cannot be classified.",
                    best.code, best.effective
                ),
                before,
                Vec::new(),
            ),
        ),
        None => (
            None,
            step(
                GirRule::Gir4,
                String::from("No heading resembles the goods; they cannot be classified."),
                before,
                Vec::new(),
            ),
        ),
    }
}

/// GIR 5: packing. Reads `packaging.kind`, `packaging.reusable` and
/// `packaging.specially_shaped`; returns `None` when the item declares no
/// packaging. The code is never changed. Packing that is reusable (or of
/// unknown reusability) is flagged for review because it may need a
/// classification of its own.
pub fn apply_gir5(item: &LineItem, heading: &HsCode) -> Option<GirStep> {
    let declared = item.attributes.keys().any(|k| k == "packaging" || k.starts_with("packaging."));
    if !declared {
        return None;
    }
    let kind = attr_text(item, "packaging.kind").or_else(|| attr_text(item, "packaging")).unwrap_or("packing");
    let reusable = item.attr("packaging.reusable").and_then(AttrValue::as_bool);
    let shaped = item.attr("packaging.specially_shaped").and_then(AttrValue::as_bool) == Some(true);
    let kind_lower = kind.to_lowercase();
    let case_like = crate::text::tokens(&kind_lower).iter().any(|t| CASE_WORDS.contains(&t.as_str()));
    let same = alloc::vec![heading.clone()];

    let s = if shaped || case_like {
        step(
            GirRule::Gir5a,
            format!("The {kind} is a case or container shaped for the goods and is classified with them in heading {heading}."),
            same.clone(),
            same,
        )
    } else if reusable == Some(false) {
        step(
            GirRule::Gir5b,
            format!("The {kind} is ordinary packing for the goods and is classified with them in heading {heading}."),
            same.clone(),
            same,
        )
    } else {
        let why = if reusable == Some(true) { "suitable for repetitive use" } else { "of undeclared reusability" };
        let mut s = step(
            GirRule::Gir5b,
            format!("The {kind} is {why}; it may need a separate classification, so the item needs review."),
            same.clone(),
            same,
        );
        s.needs_review = true;
        s
    };
    Some(s)
}
