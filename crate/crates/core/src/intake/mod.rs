//! Application intake: line items, the canonical application text format,
//! structural validation, and the extraction-adapter seam where a document
//! recognizer would plug in.

mod adapter;
mod format;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::attrs::{is_valid_key, AttrValue, Attributes};
use crate::hs::HsCode;

pub use adapter::{accept_extraction, ExtractedItem, Extraction, ExtractionAdapter, PassThroughAdapter};
pub use format::{parse_application, parse_item_blocks, render_application, ItemIssue, ParsedApplication};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntakeError {
    #[error("document is not readable UTF-8 text")]
    Unreadable,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing header field {0}")]
    MissingHeader(&'static str),
    #[error("header field {field}: {message}")]
    BadHeader { field: &'static str, message: String },
    #[error("document has no items")]
    NoItems,
    #[error("duplicate item index {0}")]
    DuplicateIndex(u32),
    #[error("item indices must run contiguously from 1; missing {0}")]
    NonContiguous(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Money {
    pub amount: f64,
    pub currency: String,
}

/// One application row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineItem {
    pub index: u32,
    pub description: String,
    pub attributes: Attributes,
    pub claimed_code: Option<HsCode>,
    pub quantity: f64,
    pub declared_value: Money,
}

impl LineItem {
    pub fn attr(&self, key: &str) -> Option<&AttrValue> {
        self.attributes.get(key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Application {
    pub app_id: String,
    pub revision: u32,
    pub applicant: String,
    pub submitted_at: DateTime<Utc>,
    pub items: Vec<LineItem>,
    /// Per-item, per-field extraction confidence reported by the adapter.
    /// Carried into findings for display; never thresholded.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub field_confidence: BTreeMap<u32, BTreeMap<String, f64>>,
}

impl Application {
    pub fn item(&self, index: u32) -> Option<&LineItem> {
        self.items.iter().find(|i| i.index == index)
    }
}

/// A field-level observation from [`validate_items`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldFinding {
    pub item_index: u32,
    pub field: String,
    pub message: String,
}

/// Flags missing claimed codes, unparseable attributes and non-positive
/// quantities or values. Output is sorted, so it does not depend on item order.
pub fn validate_items(app: &Application) -> Vec<FieldFinding> {
    let mut out = Vec::new();
    let mut push = |item: &LineItem, field: &str, message: &str| {
        out.push(FieldFinding { item_index: item.index, field: String::from(field), message: String::from(message) })
    };
    for item in &app.items {
        if item.claimed_code.is_none() {
            push(item, "claimed_code", "missing claimed code");
        }
        for (key, value) in &item.attributes {
            let bad_value = match value {
                AttrValue::Text(s) => s.trim().is_empty(),
                AttrValue::Number(n) => !n.is_finite(),
                AttrValue::List(items) => items.is_empty() || items.iter().any(|i| i.trim().is_empty()),
            };
            if !is_valid_key(key) || bad_value {
                push(item, &alloc::format!("attr.{key}"), "unparseable attribute");
            }
        }
        if item.quantity.is_nan() || item.quantity <= 0.0 {
            push(item, "quantity", "non-positive quantity");
        }
        if item.declared_value.amount.is_nan() || item.declared_value.amount <= 0.0 {
            push(item, "value", "non-positive value");
        }
    }
    out.sort();
    out
}
