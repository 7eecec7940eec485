use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;

use super::*;
use crate::attrs::AttrValue;
use crate::gir::CandidateScore;
use crate::intake::parse_application;
use crate::kb::Heading;
use crate::testkit::{code, golden_kb, handkerchief_item, item, toy_item, KbBuilder};

const SAMPLE_APP: &str = include_str!("../../fixtures/sample_application.txt");
const SAMPLE_CORRECTED: &str = include_str!("../../fixtures/sample_corrected.txt");

fn claimed(mut it: LineItem, c: &str) -> LineItem {
    it.claimed_code = Some(code(c));
    it
}

#[test]
fn toy_is_a_discrepancy_citing_chapter_39_note() {
    let kb = golden_kb();
    let f = verify_item(&kb, &toy_item());
    assert_eq!(f.status, Status::Discrepancy);
    assert_eq!(f.suggested_heading(), Some("9503"));
    let ids: Vec<&str> = f.citations.iter().map(|c| c.note_id.as_str()).collect();
    assert_eq!(ids, ["CH39-N2y"]);
    assert_eq!(f.citations[0].citation_uri, "kb://tariff/chapter-39/notes#2y");
    assert_eq!(f.suggested.as_ref().unwrap().trace[0].rule, crate::gir::GirRule::Gir1);
    assert_eq!(f.blocks.issue, "Potential misclassification if claimed under Chapter 39.");
    assert_eq!(
        f.blocks.reasoning,
        "Articles of Chapter 95 (toys) are excluded from Chapter 39 (Plastics) by Note 2(y) to Chapter 39. Application of GIR 1."
    );
    assert!(f.blocks.suggested_classification.starts_with("Heading 95.03 ("));
    assert!(f.blocks.suggested_classification.ends_with("Application of GIR 1"));
    assert!(f.explanation.contains("Note 2(y) to Chapter 39"));
    assert!(f.explanation.contains("Application of GIR 1"));
    assert!((f.confidence - 0.65).abs() < 1e-12);
}

#[test]
fn large_handkerchief_is_a_discrepancy_citing_chapter_62_note() {
    let kb = golden_kb();
    let f = verify_item(&kb, &handkerchief_item(65.0));
    assert_eq!(f.status, Status::Discrepancy);
    assert_eq!(f.suggested_heading(), Some("6214"));
    assert_eq!(f.citations.iter().map(|c| c.note_id.as_str()).collect::<Vec<_>>(), ["CH62-N8"]);
    assert_eq!(f.blocks.issue, "Potential misclassification if claimed under 62.13.");
    assert!(f.blocks.relevant_rule.starts_with("Note 8 to Chapter 62: '"));
    assert!(f.blocks.reasoning.ends_with("as per Note 8 to Chapter 62. Application of GIR 1."));
    assert_eq!(f.tier, Tier::Lexical);
}

#[test]
fn small_handkerchief_keeps_6213() {
    let kb = golden_kb();
    let f = verify_item(&kb, &handkerchief_item(60.0));
    assert_eq!(f.suggested_heading(), Some("6213"));
    assert!(f.citations.is_empty());
    // 6213 is not on the exemption list.
    assert_eq!(f.status, Status::Ineligible);
}

#[test]
fn agreeing_exempt_claim_is_verified() {
    let kb = golden_kb();
    let f = verify_item(&kb, &claimed(toy_item(), "9503.00.0000"));
    assert_eq!(f.status, Status::Verified);
    assert!(!f.subheading_mismatch);
    assert!(f.explanation.contains("9503.00.0000"));
    assert!(f.explanation.contains("FDI-EXEMPT-2024"));
}

#[test]
fn agreeing_claim_off_list_is_ineligible() {
    let kb = golden_kb();
    let it = claimed(item("plastic office supplies", &[("category", AttrValue::text("stationery"))]), "3926.10.0000");
    let f = verify_item(&kb, &it);
    assert_eq!(f.suggested_heading(), Some("3926"));
    assert_eq!(f.status, Status::Ineligible);
    assert_eq!(f.claimed_exemption, Some(ExemptionStatus::Ineligible));
}

#[test]
fn missing_claim_is_a_discrepancy_with_suggestion() {
    let kb = golden_kb();
    let mut it = toy_item();
    it.claimed_code = None;
    let f = verify_item(&kb, &it);
    assert_eq!(f.status, Status::Discrepancy);
    assert_eq!(f.blocks.issue, "No HS code was claimed for this item.");
    assert_eq!(f.suggested_heading(), Some("9503"));
}

#[test]
fn missing_dimension_needs_review_and_lists_attribute() {
    let kb = golden_kb();
    let mut it = handkerchief_item(65.0);
    it.attributes.clear();
    let f = verify_item(&kb, &it);
    assert_eq!(f.status, Status::NeedsReview);
    assert_eq!(f.missing_attributes, ["any_side_cm"]);
    assert!(f.explanation.contains("Missing attributes: any_side_cm"));
}

#[test]
fn reusable_packing_needs_review() {
    let kb = golden_kb();
    let mut it = claimed(toy_item(), "9503.00.0000");
    it.attributes.insert("packaging.kind".into(), AttrValue::text("steel drum"));
    it.attributes.insert("packaging.reusable".into(), AttrValue::text("true"));
    let f = verify_item(&kb, &it);
    assert_eq!(f.status, Status::NeedsReview);
    assert!(f.review_reasons.iter().any(|r| r.starts_with("GIR 5(b)")));
}

#[test]
fn undetermined_classification_needs_review() {
    let kb = golden_kb();
    let f = verify_item(&kb, &claimed(item("zzz", &[]), "9503"));
    assert_eq!(f.status, Status::NeedsReview);
    assert_eq!(f.confidence, 0.0);
    assert_eq!(f.suggested_code(), None);
}

#[test]
fn subheading_mismatch_keeps_heading_status() {
    let kb = golden_kb();
    let f = verify_item(&kb, &claimed(handkerchief_item(65.0), "6214.10.0000"));
    assert_eq!(f.suggested_code(), Some(&code("621490")));
    assert!(f.subheading_mismatch);
    assert_eq!(f.status, Status::Verified);
    assert!(f.explanation.contains("subheading differs"));
}

#[test]
fn undetermined_exemption_condition_needs_review() {
    let kb = KbBuilder::new()
        .heading("8712", &["bicycles"])
        .exemption("L1", "8712", Some("frame_material = 'carbon'"))
        .build();
    let f = verify_item(&kb, &claimed(item("bicycles", &[]), "8712"));
    assert_eq!(f.status, Status::NeedsReview);
    assert_eq!(f.missing_attributes, ["frame_material"]);
    let ok = verify_item(&kb, &claimed(item("bicycles", &[("frame_material", AttrValue::text("carbon"))]), "8712"));
    assert_eq!(ok.status, Status::Verified);
    let no = verify_item(&kb, &claimed(item("bicycles", &[("frame_material", AttrValue::text("steel"))]), "8712"));
    assert_eq!(no.status, Status::Ineligible);
}

#[test]
fn sample_application_has_two_discrepancies() {
    let kb = golden_kb();
    let app = parse_application(SAMPLE_APP.as_bytes()).unwrap().application;
    let report = verify_application(&kb, &app);
    assert_eq!(report.findings.len(), 2);
    assert_eq!(report.summary.discrepancy, 2);
    assert_eq!(report.summary.total, 2);
    assert_eq!(report.kb_version, "1");
    assert!(report.has_findings());
    let text = render_report_text(&report);
    assert!(text.contains("Issue: Potential misclassification if claimed under Chapter 39."));
    assert!(text.contains("Issue: Potential misclassification if claimed under 62.13."));
}

#[test]
fn corrected_application_is_verified() {
    let kb = golden_kb();
    let app = parse_application(SAMPLE_CORRECTED.as_bytes()).unwrap().application;
    let report = verify_application(&kb, &app);
    assert_eq!(report.summary.verified, 2, "{}", render_report_text(&report));
    assert!(!report.has_findings());
}

#[test]
fn reports_serialize_identically() {
    let kb = golden_kb();
    let app = parse_application(SAMPLE_APP.as_bytes()).unwrap().application;
    let a = verify_application(&kb, &app).to_json();
    let b = verify_application(&kb, &app).to_json();
    assert_eq!(a, b);
    let back: VerificationReport = serde_json::from_str(&a).unwrap();
    assert_eq!(back.to_json(), a);
    assert!(a.contains("\"Relevant Rule/Note\""));
}

#[test]
fn field_confidence_is_carried_not_used() {
    let kb = golden_kb();
    let mut app = parse_application(SAMPLE_APP.as_bytes()).unwrap().application;
    let plain = verify_application(&kb, &app);
    app.field_confidence.insert(1, [(String::from("claimed_code"), 0.4)].into_iter().collect());
    let with = verify_application(&kb, &app);
    assert_eq!(with.findings[0].field_confidence["claimed_code"], 0.4);
    assert_eq!(with.findings[0].status, plain.findings[0].status);
}

#[test]
fn report_carries_kb_version_and_builder_synonyms() {
    let kb = KbBuilder::new().version("2.1").heading("6213", &["handkerchiefs"]).synonym("Hankies", "handkerchief").build();
    let mut it = claimed(item("hankies", &[]), "6213");
    it.index = 1;
    let app = crate::intake::Application {
        app_id: "A".into(),
        revision: 1,
        applicant: "B".into(),
        submitted_at: chrono::DateTime::from_timestamp(0, 0).unwrap(),
        items: alloc::vec![it],
        field_confidence: Default::default(),
    };
    let report = verify_application(&kb, &app);
    assert_eq!(report.kb_version, "2.1");
    assert_eq!(report.findings[0].tier, Tier::Semantic);
    assert_eq!(report.findings[0].status, Status::Ineligible);
}

struct Counting<'a>(&'a AtomicUsize);

impl SemanticAdapter for Counting<'_> {
    fn name(&self) -> &str {
        "counting"
    }
    fn deterministic(&self) -> bool {
        true
    }
    fn rank(&self, _: &str, _: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Ok(SemanticRanking { scores: Vec::new(), rationale: String::new() })
    }
}

struct Failing;

impl SemanticAdapter for Failing {
    fn name(&self) -> &str {
        "failing"
    }
    fn deterministic(&self) -> bool {
        true
    }
    fn rank(&self, _: &str, _: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        Err(AdapterError::Failed { provider: "failing".into(), message: "timeout".into() })
    }
}

struct Rogue;

impl SemanticAdapter for Rogue {
    fn name(&self) -> &str {
        "rogue"
    }
    fn deterministic(&self) -> bool {
        true
    }
    fn rank(&self, _: &str, _: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        let scores = alloc::vec![CandidateScore { heading: code("0101"), score: 0.9, matched_tokens: Vec::new() }];
        Ok(SemanticRanking { scores, rationale: String::new() })
    }
}

#[test]
fn strong_lexical_skips_adapter() {
    let kb = golden_kb();
    let calls = AtomicUsize::new(0);
    let adapter = Counting(&calls);
    let it = item("woven cotton handkerchiefs", &[]);
    let lexical = crate::gir::candidate_headings(&kb, &it);
    assert!(lexical[0].score >= 0.6);
    let r = tiered_rank(&kb, &it.description, lexical.clone(), 0.6, &adapter);
    assert_eq!(r.tier, Tier::Lexical);
    assert_eq!(r.scores, lexical);
    assert_eq!(calls.load(Ordering::SeqCst), 0);
}

#[test]
fn synonym_tier_finds_hanky() {
    let kb = golden_kb();
    let it = item("hanky", &[]);
    let lexical = crate::gir::candidate_headings(&kb, &it);
    assert!(lexical.is_empty());
    let r = tiered_rank(&kb, "hanky", lexical, 0.6, &SynonymAdapter::from_kb(&kb));
    assert_eq!(r.tier, Tier::Semantic);
    // "hanky" folds to "handkerchief", the only token, which both headings carry.
    let got: Vec<(&str, f64)> = r.scores.iter().map(|s| (s.heading.digits(), s.score)).collect();
    assert_eq!(got, [("6213", 1.0), ("6214", 1.0)]);
    assert!(r.rationale.unwrap().contains("hanky -> handkerchief"));
}

#[test]
fn adapter_failure_falls_back_to_lexical() {
    let kb = golden_kb();
    let it = toy_item();
    let lexical = crate::gir::candidate_headings(&kb, &it);
    let r = tiered_rank(&kb, &it.description, lexical.clone(), 0.6, &Failing);
    assert_eq!(r.tier, Tier::Fallback);
    assert!(r.evidence_incomplete);
    assert_eq!(r.scores, lexical);

    let options = VerifyOptions { adapter: Some(&Failing), ..VerifyOptions::default() };
    let f = verify_item_with(&kb, &it, &options);
    assert_eq!(f.status, Status::NeedsReview);
    assert_eq!(f.tier, Tier::Fallback);
    // the heading is still suggested from the lexical tier
    assert_eq!(f.suggested_heading(), Some("9503"));

    let r = tiered_rank(&kb, &it.description, lexical, 0.6, &Rogue);
    assert_eq!(r.tier, Tier::Fallback);
}

#[test]
fn adapter_failure_is_isolated_per_item() {
    let kb = golden_kb();
    let app = parse_application(SAMPLE_APP.as_bytes()).unwrap().application;
    let options = VerifyOptions { adapter: Some(&Failing), ..VerifyOptions::default() };
    let report = verify_application_with(&kb, &app, &options);
    // item 1 needs the semantic tier (top score 0.25); item 2 does not.
    assert_eq!(report.findings[0].status, Status::NeedsReview);
    assert_eq!(report.findings[1], verify_application(&kb, &app).findings[1]);
}

fn arb_score() -> impl Strategy<Value = Vec<CandidateScore>> {
    prop::collection::vec(
        (prop::sample::select(alloc::vec!["3926", "6213", "6214", "8712", "9503"]), 0.0f64..=1.0),
        0..5,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(h, s)| CandidateScore { heading: code(h), score: s, matched_tokens: Vec::new() })
            .collect()
    })
}

const WORDS: &[&str] = &[
    "plastic", "toy", "toys", "cotton", "woven", "handkerchief", "hanky", "silk", "shawl", "bicycle", "parts",
    "scooter", "doll", "figure", "large", "zzz", "office", "supplies", "veils",
];

fn arb_item() -> impl Strategy<Value = LineItem> {
    (
        prop::collection::vec(prop::sample::select(WORDS), 1..6),
        prop::option::of(prop::sample::select(alloc::vec!["toy", "doll"])),
        prop::option::of(40.0f64..90.0),
        prop::option::of(prop::sample::select(alloc::vec![
            "3926.90.0000",
            "9503.00.0000",
            "6213.00.0000",
            "6214.90.0000",
            "8712.00"
        ])),
    )
        .prop_map(|(words, category, side, claim)| {
            let mut it = item(&words.join(" "), &[]);
            if let Some(c) = category {
                it.attributes.insert("category".into(), AttrValue::text(c));
            }
            if let Some(s) = side {
                it.attributes.insert("width_cm".into(), AttrValue::Number(s));
                it.attributes.insert("height_cm".into(), AttrValue::Number(30.0));
            }
            it.claimed_code = claim.map(code);
            it
        })
}

proptest! {
    #[test]
    fn merge_never_lowers_top_score(lexical in arb_score(), semantic in arb_score()) {
        let mut sorted = lexical.clone();
        sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
        let merged = merge_max(&lexical, &semantic);
        let top_before = sorted.first().map_or(0.0, |s| s.score);
        let top_after = merged.first().map_or(0.0, |s| s.score);
        prop_assert!(top_after >= top_before);
        for s in &lexical {
            if s.score > 0.0 {
                let m = merged.iter().find(|m| m.heading == s.heading).unwrap();
                prop_assert!(m.score >= s.score);
            }
        }
    }

    #[test]
    fn status_soundness_and_citation_completeness(it in arb_item()) {
        let kb = golden_kb();
        let f = verify_item(&kb, &it);
        prop_assert!((0.0..=1.0).contains(&f.confidence));
        match f.status {
            Status::Verified => {
                let c = f.claimed_code.as_ref().unwrap();
                prop_assert!(kb.exemption_status(c, &it.attributes).is_eligible());
                prop_assert_eq!(Some(c.heading()), f.suggested_heading());
            }
            Status::Discrepancy => {
                prop_assert!(f.suggested_code().is_some());
                prop_assert!(f.claimed_code.as_ref().map(|c| c.heading()) != f.suggested_heading());
            }
            Status::Ineligible => {
                let c = f.claimed_code.as_ref().unwrap();
                prop_assert!(!kb.exemption_status(c, &it.attributes).is_eligible());
            }
            Status::NeedsReview => prop_assert!(!f.review_reasons.is_empty()),
        }
        let cited: Vec<&str> = f.citations.iter().map(|c| c.note_id.as_str()).collect();
        for step in &f.suggested.as_ref().unwrap().trace {
            for id in &step.cited_notes {
                prop_assert!(cited.contains(&id.as_str()));
            }
        }
        prop_assert_eq!(explain(&f), f.explanation.clone());
    }
}
