use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hs::HsCode;
use crate::intake::LineItem;
use crate::kb::{Heading, KnowledgeBase};
use crate::text::tokens;

/// Lexical match of an item description against one heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub heading: HsCode,
    /// `matched_tokens.len() / |item tokens|`.
    pub score: f64,
    pub matched_tokens: Vec<String>,
}

/// Union of the tokens of every term.
pub(crate) fn terms_tokens(terms: &[String]) -> BTreeSet<String> {
    terms.iter().flat_map(|t| tokens(t)).collect()
}

/// Scores `headings` against already-normalized description tokens. Only
/// positive scores are returned, ordered by score descending then code.
pub fn score_tokens<'h>(item: &BTreeSet<String>, headings: impl IntoIterator<Item = &'h Heading>) -> Vec<CandidateScore> {
    score_tokens_with(item, headings, terms_tokens)
}

pub(crate) fn score_tokens_with<'h>(
    item: &BTreeSet<String>,
    headings: impl IntoIterator<Item = &'h Heading>,
    heading_tokens: impl Fn(&[String]) -> BTreeSet<String>,
) -> Vec<CandidateScore> {
    if item.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<CandidateScore> = headings
        .into_iter()
        .filter_map(|h| {
            let heading_tokens = heading_tokens(&h.terms);
            let matched: Vec<String> = item.intersection(&heading_tokens).cloned().collect();
            (!matched.is_empty()).then(|| CandidateScore {
                heading: h.code.clone(),
                score: matched.len() as f64 / item.len() as f64,
                matched_tokens: matched,
            })
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.heading.cmp(&b.heading)));
    out
}

/// Scores every heading against `text`.
pub fn score_text(kb: &KnowledgeBase, text: &str) -> Vec<CandidateScore> {
    score_tokens(&tokens(text), kb.headings())
}

/// Candidate headings for an item, scored on its description (the cheap
/// lexical tier; synonym folding belongs to the semantic tier).
pub fn candidate_headings(kb: &KnowledgeBase, item: &LineItem) -> Vec<CandidateScore> {
    score_text(kb, &item.description)
}

/// How well a declared essential character names a heading.
#[derive(Debug, Clone, PartialEq)]
pub struct EssentialMatch {
    pub heading: HsCode,
    /// Some term of the heading has exactly the same token set.
    pub exact: bool,
    /// Fraction of the essential-character tokens found in the heading terms.
    pub coverage: f64,
}

fn essential_match(wanted: &BTreeSet<String>, heading: &Heading) -> EssentialMatch {
    let exact = heading.terms.iter().any(|t| tokens(t) == *wanted);
    let found = terms_tokens(&heading.terms).intersection(wanted).count();
    EssentialMatch { heading: heading.code.clone(), exact, coverage: found as f64 / wanted.len() as f64 }
}

/// Headings best named by `essential` (an `essential_character` value):
/// exact term matches beat partial ones, then higher coverage wins. All
/// headings tied at the top are returned in code order; an empty result
/// means nothing reaches `min_coverage`.
pub fn essential_matches(kb: &KnowledgeBase, essential: &str, min_coverage: f64) -> Vec<EssentialMatch> {
    let wanted = tokens(essential);
    if wanted.is_empty() {
        return Vec::new();
    }
    let all: Vec<EssentialMatch> = kb
        .headings()
        .map(|h| essential_match(&wanted, h))
        .filter(|m| m.coverage > 0.0 && m.coverage >= min_coverage)
        .collect();
    let Some(best) = all.iter().map(|m| (m.exact, m.coverage)).max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
    else {
        return Vec::new();
    };
    all.into_iter().filter(|m| (m.exact, m.coverage) == best).collect()
}
