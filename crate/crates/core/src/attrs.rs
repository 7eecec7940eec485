//! Free-form item attributes keyed by lowercase dotted names.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A typed attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Number(f64),
    Text(String),
    List(Vec<String>),
}

/// Attribute map; ordered so that every rendering is deterministic.
pub type Attributes = BTreeMap<String, AttrValue>;

impl AttrValue {
    pub fn text(s: impl Into<String>) -> Self {
        AttrValue::Text(s.into())
    }

    pub fn list<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AttrValue::List(items.into_iter().map(Into::into).collect())
    }

    /// Numeric view; text that parses as a finite number counts.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Number(n) => Some(*n),
            AttrValue::Text(s) => s.trim().parse::<f64>().ok().filter(|n| n.is_finite()),
            AttrValue::List(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Boolean view of `true`/`false`/`yes`/`no`/`1`/`0`.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttrValue::Number(n) if *n == 1.0 => Some(true),
            AttrValue::Number(n) if *n == 0.0 => Some(false),
            AttrValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Some(true),
                "false" | "no" | "0" => Some(false),
                _ => None,
            },
            _ => None,
        }
    }

    /// The value seen as a list of text items (scalars become singletons).
    pub fn items(&self) -> Vec<String> {
        match self {
            AttrValue::List(items) => items.clone(),
            AttrValue::Text(s) => alloc::vec![s.clone()],
            AttrValue::Number(n) => alloc::vec![alloc::format!("{n}")],
        }
    }
}

/// True for keys of the form `name(.name)*` with `name := [a-z_][a-z0-9_]*`.
pub fn is_valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            let mut chars = part.chars();
            matches!(chars.next(), Some('a'..='z' | '_'))
                && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
        })
}
