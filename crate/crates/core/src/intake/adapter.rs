use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::format::{parse_application, ItemIssue, ParsedApplication};
use super::{Application, IntakeError, LineItem};
use crate::attrs::is_valid_key;

/// One extracted row plus the provider's confidence per field name.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedItem {
    pub item: LineItem,
    pub confidence: BTreeMap<String, f64>,
}

/// Raw adapter output, before [`accept_extraction`] checks it.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub application: Application,
    pub items: Vec<ExtractedItem>,
    /// Problems the provider already reported for individual rows.
    pub issues: Vec<ItemIssue>,
}

/// A provider that turns raw document bytes into line items.
///
/// Scanned-document recognition belongs behind this trait; the crate ships
/// only [`PassThroughAdapter`], which reads the canonical text format.
pub trait ExtractionAdapter {
    fn name(&self) -> &str;

    fn extract(&self, document: &[u8]) -> Result<Extraction, IntakeError>;
}

/// Reads already-structured application text. Every field it reads is
/// reported at confidence 1.0.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThroughAdapter;

impl ExtractionAdapter for PassThroughAdapter {
    fn name(&self) -> &str {
        "pass-through"
    }

    fn extract(&self, document: &[u8]) -> Result<Extraction, IntakeError> {
        let ParsedApplication { mut application, issues } = parse_application(document)?;
        let items = core::mem::take(&mut application.items)
            .into_iter()
            .map(|item| {
                let mut fields: Vec<String> =
                    ["index", "description", "quantity", "value", "currency"].iter().map(|s| String::from(*s)).collect();
                if item.claimed_code.is_some() {
                    fields.push(String::from("claimed_code"));
                }
                fields.extend(item.attributes.keys().map(|k| alloc::format!("attr.{k}")));
                ExtractedItem { item, confidence: fields.into_iter().map(|f| (f, 1.0)).collect() }
            })
            .collect();
        Ok(Extraction { application, items, issues })
    }
}

/// Checks adapter output against the line-item invariants. Offending rows
/// are moved into the issue report with the failing field named. Confidence
/// maps are kept only for rows with some field below 1.0.
pub fn accept_extraction(extraction: Extraction) -> ParsedApplication {
    let Extraction { mut application, items, mut issues } = extraction;
    application.items.clear();
    for (n, extracted) in items.into_iter().enumerate() {
        let item = &extracted.item;
        let problem = if item.index == 0 {
            Some(("index", "index must be >= 1"))
        } else if item.description.trim().is_empty() {
            Some(("description", "missing description"))
        } else if item.attributes.keys().any(|k| !is_valid_key(k)) {
            Some(("attributes", "attribute keys must be lowercase dotted identifiers"))
        } else if item.quantity.is_nan() || item.quantity < 0.0 {
            Some(("quantity", "quantity must be >= 0"))
        } else if !item.declared_value.amount.is_finite() {
            Some(("value", "value must be a finite number"))
        } else if application.items.iter().any(|i| i.index == item.index) {
            Some(("index", "duplicate index"))
        } else {
            None
        };
        match problem {
            Some((field, message)) => issues.push(ItemIssue {
                block: n + 1,
                index: Some(item.index),
                line: 0,
                field: String::from(field),
                message: String::from(message),
            }),
            None => {
                if extracted.confidence.values().any(|c| *c < 1.0) {
                    application.field_confidence.insert(item.index, extracted.confidence.clone());
                }
                application.items.push(extracted.item);
            }
        }
    }
    application.items.sort_by_key(|i| i.index);
    ParsedApplication { application, issues }
}
