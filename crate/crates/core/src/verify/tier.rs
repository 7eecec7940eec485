//! Tiered candidate ranking: the lexical matcher first, a semantic adapter
//! only when the lexical result is weak.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::gir::CandidateScore;
use crate::gir::score_tokens_with;
use crate::hs::HsCode;
use crate::kb::{Heading, KnowledgeBase};
use crate::text::tokens;

/// Why a semantic adapter could not rank.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdapterError {
    #[error("adapter {provider} failed: {message}")]
    Failed { provider: String, message: String },
    #[error("adapter {provider} returned heading {heading} that was not offered")]
    UnknownHeading { provider: String, heading: String },
    #[error("adapter {provider} returned a score outside [0, 1]")]
    ScoreOutOfRange { provider: String },
}

/// Adapter output: scored headings plus a free-text rationale.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticRanking {
    pub scores: Vec<CandidateScore>,
    pub rationale: String,
}

/// The boundary to a semantic ranking provider (a language model client, or
/// the deterministic [`SynonymAdapter`]). Implementations must only score
/// headings from `candidates` and keep scores within `[0, 1]`; violations
/// are treated as failures.
pub trait SemanticAdapter: Send + Sync {
    fn name(&self) -> &str;

    /// Same input, same output.
    fn deterministic(&self) -> bool;

    fn rank(&self, description: &str, candidates: &[&Heading]) -> Result<SemanticRanking, AdapterError>;
}

impl<A: SemanticAdapter + ?Sized> SemanticAdapter for Box<A> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }

    fn rank(&self, description: &str, candidates: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        (**self).rank(description, candidates)
    }
}

/// Deterministic default adapter: the lexical score after folding words
/// through a synonym table (e.g. "hanky" → "handkerchief").
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynonymAdapter {
    synonyms: BTreeMap<String, String>,
}

impl SynonymAdapter {
    /// `synonyms` maps a word to its canonical form; both sides are
    /// normalized like description tokens.
    pub fn new(synonyms: &BTreeMap<String, String>) -> Self {
        let norm = |w: &str| tokens(w).into_iter().next().unwrap_or_else(|| w.to_lowercase());
        Self { synonyms: synonyms.iter().map(|(k, v)| (norm(k), norm(v))).collect() }
    }

    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        Self::new(kb.synonyms())
    }

    fn fold(&self, text: &str) -> BTreeSet<String> {
        tokens(text).into_iter().map(|t| self.synonyms.get(&t).cloned().unwrap_or(t)).collect()
    }
}

impl SemanticAdapter for SynonymAdapter {
    fn name(&self) -> &str {
        "synonym-table"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn rank(&self, description: &str, candidates: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        let item = self.fold(description);
        let scores = score_tokens_with(&item, candidates.iter().copied(), |terms| {
            terms.iter().flat_map(|t| self.fold(t)).collect()
        });
        let used: Vec<String> = tokens(description)
            .into_iter()
            .filter_map(|t| self.synonyms.get(&t).map(|c| format!("{t} -> {c}")))
            .collect();
        let rationale = if used.is_empty() {
            String::from("no synonyms applied")
        } else {
            format!("synonyms applied: {}", used.join(", "))
        };
        Ok(SemanticRanking { scores, rationale })
    }
}

/// Which tier produced the candidate ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// The lexical score was strong enough; the adapter was not called.
    Lexical,
    /// The adapter was called and its scores merged in.
    Semantic,
    /// The adapter failed; lexical scores were used and evidence marked incomplete.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieredRanking {
    pub scores: Vec<CandidateScore>,
    pub tier: Tier,
    pub evidence_incomplete: bool,
    pub rationale: Option<String>,
    pub error: Option<String>,
}

fn check(ranking: &SemanticRanking, offered: &[&Heading], provider: &str) -> Result<(), AdapterError> {
    let known: BTreeSet<&HsCode> = offered.iter().map(|h| &h.code).collect();
    for s in &ranking.scores {
        if !known.contains(&s.heading) {
            return Err(AdapterError::UnknownHeading {
                provider: String::from(provider),
                heading: String::from(s.heading.digits()),
            });
        }
        if !(0.0..=1.0).contains(&s.score) {
            return Err(AdapterError::ScoreOutOfRange { provider: String::from(provider) });
        }
    }
    Ok(())
}

/// Keeps, per heading, the higher of the two scores. Output is ordered by
/// score descending then code.
pub fn merge_max(lexical: &[CandidateScore], semantic: &[CandidateScore]) -> Vec<CandidateScore> {
    let mut best: BTreeMap<HsCode, CandidateScore> = BTreeMap::new();
    for s in lexical.iter().chain(semantic) {
        match best.get(&s.heading) {
            Some(b) if b.score >= s.score => {}
            _ => {
                best.insert(s.heading.clone(), s.clone());
            }
        }
    }
    let mut out: Vec<CandidateScore> = best.into_values().filter(|s| s.score > 0.0).collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.heading.cmp(&b.heading)));
    out
}

/// Returns `lexical` untouched when its top score reaches `tier_threshold`;
/// otherwise asks `adapter` to rank every KB heading and merges the two by
/// maximum per heading. Adapter failure falls back to `lexical` with
/// `evidence_incomplete` set.
pub fn tiered_rank(
    kb: &KnowledgeBase,
    description: &str,
    lexical: Vec<CandidateScore>,
    tier_threshold: f64,
    adapter: &dyn SemanticAdapter,
) -> TieredRanking {
    let top = lexical.first().map_or(0.0, |s| s.score);
    if top >= tier_threshold {
        return TieredRanking { scores: lexical, tier: Tier::Lexical, evidence_incomplete: false, rationale: None, error: None };
    }
    let offered: Vec<&Heading> = kb.headings().collect();
    let result = adapter.rank(description, &offered).and_then(|r| check(&r, &offered, adapter.name()).map(|()| r));
    match result {
        Ok(ranking) => TieredRanking {
            scores: merge_max(&lexical, &ranking.scores),
            tier: Tier::Semantic,
            evidence_incomplete: false,
            rationale: Some(ranking.rationale),
            error: None,
        },
        Err(e) => TieredRanking {
            scores: lexical,
            tier: Tier::Fallback,
            evidence_incomplete: true,
            rationale: None,
            error: Some(format!("{e}")),
        },
    }
}
