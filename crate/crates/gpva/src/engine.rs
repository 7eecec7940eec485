//! Parallel verification of applications, shared by the CLI and the HTTP
//! service so both produce identical reports.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Condvar, Mutex};

use gpva_core::gir::EngineConfig;
use gpva_core::intake::{Application, LineItem};
use gpva_core::kb::{Heading, KnowledgeBase};
use gpva_core::verify::{
    attach_confidence, verify_item_with, AdapterError, Finding, SemanticAdapter, SemanticRanking, SynonymAdapter,
    VerificationReport, VerifyOptions,
};
use rayon::prelude::*;

use crate::config::{AdapterKind, ServiceConfig};

/// Semantic tier that never adds candidates.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalOnly;

impl SemanticAdapter for LexicalOnly {
    fn name(&self) -> &str {
        "lexical-only"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn rank(&self, _description: &str, _candidates: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        Ok(SemanticRanking { scores: Vec::new(), rationale: String::from("semantic tier disabled") })
    }
}

/// Wraps an adapter so at most `limit` calls run at once and a panicking
/// adapter turns into an [`AdapterError`] for that item only.
pub struct BoundedAdapter<A> {
    inner: A,
    limit: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a, A>(&'a BoundedAdapter<A>);

impl<A> Drop for Permit<'_, A> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

impl<A> BoundedAdapter<A> {
    pub fn new(inner: A, limit: usize) -> Self {
        Self { inner, limit: limit.max(1), in_flight: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_, A> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(self)
    }
}

impl<A: SemanticAdapter> SemanticAdapter for BoundedAdapter<A> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }

    fn rank(&self, description: &str, candidates: &[&Heading]) -> Result<SemanticRanking, AdapterError> {
        let _permit = self.acquire();
        catch_unwind(AssertUnwindSafe(|| self.inner.rank(description, candidates))).unwrap_or_else(|_| {
            Err(AdapterError::Failed { provider: self.inner.name().to_string(), message: String::from("adapter panicked") })
        })
    }
}

#[derive(Clone)]
enum AdapterChoice {
    KbSynonyms,
    Lexical,
    Custom(Arc<dyn SemanticAdapter>),
}

/// Verification settings plus the semantic adapter.
#[derive(Clone)]
pub struct Verifier {
    engine: EngineConfig,
    tier_threshold: f64,
    adapter: AdapterChoice,
}

impl std::fmt::Debug for Verifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let adapter = match &self.adapter {
            AdapterChoice::KbSynonyms => "synonym-table",
            AdapterChoice::Lexical => "lexical-only",
            AdapterChoice::Custom(a) => a.name(),
        };
        f.debug_struct("Verifier")
            .field("engine", &self.engine)
            .field("tier_threshold", &self.tier_threshold)
            .field("adapter", &adapter)
            .finish()
    }
}

impl Default for Verifier {
    fn default() -> Self {
        Self::from_config(&ServiceConfig::default())
    }
}

impl Verifier {
    pub fn from_config(config: &ServiceConfig) -> Self {
        let adapter = match config.adapter {
            AdapterKind::Synonym => AdapterChoice::KbSynonyms,
            AdapterKind::Lexical => AdapterChoice::Lexical,
        };
        Self { engine: config.engine(), tier_threshold: config.thresholds.tier, adapter }
    }

    /// Uses an external adapter, bounded to `concurrency` simultaneous calls.
    pub fn with_adapter<A: SemanticAdapter + 'static>(mut self, adapter: A, concurrency: usize) -> Self {
        self.adapter = AdapterChoice::Custom(Arc::new(BoundedAdapter::new(adapter, concurrency)));
        self
    }

    pub fn engine(&self) -> &EngineConfig {
        &self.engine
    }

    fn with_options<R>(&self, kb: &KnowledgeBase, f: impl FnOnce(&VerifyOptions<'_>) -> R) -> R {
        let synonyms;
        let adapter: &dyn SemanticAdapter = match &self.adapter {
            AdapterChoice::KbSynonyms => {
                synonyms = SynonymAdapter::from_kb(kb);
                &synonyms
            }
            AdapterChoice::Lexical => &LexicalOnly,
            AdapterChoice::Custom(a) => a.as_ref(),
        };
        f(&VerifyOptions { engine: self.engine, tier_threshold: self.tier_threshold, adapter: Some(adapter) })
    }

    /// Verifies all items in parallel. Findings keep item order, and a
    /// single KB snapshot is used throughout.
    pub fn verify(&self, kb: &KnowledgeBase, app: &Application) -> VerificationReport {
        let findings = self.with_options(kb, |options| {
            app.items.par_iter().map(|item| attach_confidence(app, verify_item_with(kb, item, options))).collect()
        });
        VerificationReport::assemble(app, kb, findings)
    }

    /// Verifies a single item outside any application.
    pub fn verify_item(&self, kb: &KnowledgeBase, item: &LineItem) -> Finding {
        self.with_options(kb, |options| verify_item_with(kb, item, options))
    }
}
