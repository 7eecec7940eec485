//! Canonical application text format.
//!
//! ```text
//! app_id = APP-2024-0001
//! applicant = Example Trading Sdn Bhd
//! revision = 1
//! submitted_at = 2024-05-01T09:00:00Z
//!
//! [item]
//! index = 1
//! description = Doraemon plastic figure (toy)
//! claimed_code = 3926.90.0000
//! quantity = 500
//! value = 2500
//! currency = MYR
//! attr.category = toy
//! attr.materials = ["plastic", "steel"]
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Attribute values are
//! numbers when they parse as finite numbers, lists when bracketed, quoted
//! strings when double-quoted, and bare text otherwise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{Application, IntakeError, LineItem, Money};
use crate::attrs::{is_valid_key, AttrValue, Attributes};
use crate::hs::HsCode;

/// A problem confined to one item block; the block is skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemIssue {
    /// 1-based position of the `[item]` block in the document.
    pub block: usize,
    pub index: Option<u32>,
    pub line: usize,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedApplication {
    pub application: Application,
    /// Item-level problems; empty when every block parsed.
    pub issues: Vec<ItemIssue>,
}

impl ParsedApplication {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

struct Block {
    start_line: usize,
    lines: Vec<(usize, String, String)>,
}

struct Document {
    header: Vec<(usize, String, String)>,
    blocks: Vec<Block>,
}

fn split_document(text: &str) -> Result<Document, IntakeError> {
    let mut doc = Document { header: Vec::new(), blocks: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if line == "[item]" {
                doc.blocks.push(Block { start_line: line_no, lines: Vec::new() });
                continue;
            }
            return Err(IntakeError::Syntax { line: line_no, message: format!("unknown block {line:?}") });
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(IntakeError::Syntax { line: line_no, message: String::from("expected `key = value`") });
        };
        let entry = (line_no, key.trim().to_string(), value.trim().to_string());
        match doc.blocks.last_mut() {
            Some(block) => block.lines.push(entry),
            None => doc.header.push(entry),
        }
    }
    Ok(doc)
}

/// Parses an application document. Whole-document problems are errors;
/// problems inside one item block are collected in
/// [`ParsedApplication::issues`] and that item is left out.
pub fn parse_application(document: &[u8]) -> Result<ParsedApplication, IntakeError> {
    let text = core::str::from_utf8(document).map_err(|_| IntakeError::Unreadable)?;
    let doc = split_document(text)?;

    let mut header: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (line, key, value) in &doc.header {
        let known = ["app_id", "applicant", "revision", "submitted_at"];
        let Some(name) = known.iter().find(|k| **k == key.as_str()) else {
            return Err(IntakeError::Syntax { line: *line, message: format!("unknown header field {key:?}") });
        };
        if header.insert(name, (*line, value.as_str())).is_some() {
            return Err(IntakeError::Syntax { line: *line, message: format!("duplicate header field {key:?}") });
        }
    }
    let field = |name: &'static str| -> Result<String, IntakeError> {
        let (_, raw) = header.get(name).ok_or(IntakeError::MissingHeader(name))?;
        let value = unquote(raw).map_err(|message| IntakeError::BadHeader { field: name, message })?;
        if value.trim().is_empty() {
            return Err(IntakeError::BadHeader { field: name, message: String::from("empty") });
        }
        Ok(value)
    };
    let app_id = field("app_id")?;
    let applicant = field("applicant")?;
    let revision = field("revision")?
        .parse::<u32>()
        .ok()
        .filter(|r| *r >= 1)
        .ok_or(IntakeError::BadHeader { field: "revision", message: String::from("expected an integer >= 1") })?;
    let submitted_at = DateTime::parse_from_rfc3339(&field("submitted_at")?)
        .map_err(|e| IntakeError::BadHeader { field: "submitted_at", message: e.to_string() })?
        .with_timezone(&Utc);

    let (items, issues) = parse_blocks(&doc.blocks)?;
    Ok(ParsedApplication {
        application: Application {
            app_id,
            revision,
            applicant,
            submitted_at,
            items,
            field_confidence: BTreeMap::new(),
        },
        issues,
    })
}

/// Parses only the `[item]` blocks of a document; header lines are ignored.
pub fn parse_item_blocks(document: &[u8]) -> Result<(Vec<LineItem>, Vec<ItemIssue>), IntakeError> {
    let text = core::str::from_utf8(document).map_err(|_| IntakeError::Unreadable)?;
    parse_blocks(&split_document(text)?.blocks)
}

fn parse_blocks(blocks: &[Block]) -> Result<(Vec<LineItem>, Vec<ItemIssue>), IntakeError> {
    if blocks.is_empty() {
        return Err(IntakeError::NoItems);
    }
    let mut declared = BTreeSet::new();
    for block in blocks {
        if let Some((_, _, raw)) = block.lines.iter().find(|(_, k, _)| k == "index") {
            if let Ok(index) = raw.parse::<u32>() {
                if !declared.insert(index) {
                    return Err(IntakeError::DuplicateIndex(index));
                }
            }
        }
    }
    let mut items = Vec::new();
    let mut issues = Vec::new();
    for (n, block) in blocks.iter().enumerate() {
        match parse_item(block) {
            Ok(item) => items.push(item),
            Err((index, line, field, message)) => {
                issues.push(ItemIssue { block: n + 1, index, line, field, message });
            }
        }
    }
    if issues.is_empty() {
        if let Some(missing) = (1..=blocks.len() as u32).find(|i| !declared.contains(i)) {
            return Err(IntakeError::NonContiguous(missing));
        }
    }
    items.sort_by_key(|i| i.index);
    Ok((items, issues))
}

type BlockError = (Option<u32>, usize, String, String);

fn parse_item(block: &Block) -> Result<LineItem, BlockError> {
    let mut index = None;
    let mut description = None;
    let mut claimed_code = None;
    let mut quantity = None;
    let mut amount = None;
    let mut currency = None;
    let mut attributes = Attributes::new();
    let mut seen = BTreeSet::new();

    // Index first so every later error can name the item.
    if let Some((line, _, raw)) = block.lines.iter().find(|(_, k, _)| k == "index") {
        match raw.parse::<u32>() {
            Ok(i) if i >= 1 => index = Some(i),
            _ => return Err((None, *line, "index".into(), format!("bad index {raw:?}"))),
        }
    }
    let fail = |line: usize, field: &str, message: String| (index, line, String::from(field), message);

    for (line, key, raw) in &block.lines {
        let line = *line;
        if !seen.insert(key.as_str()) {
            return Err(fail(line, key, String::from("duplicate field")));
        }
        match key.as_str() {
            "index" => {}
            "description" => description = Some(unquote(raw).map_err(|m| fail(line, key, m))?),
            "claimed_code" => {
                let text = unquote(raw).map_err(|m| fail(line, key, m))?;
                if !text.trim().is_empty() {
                    claimed_code =
                        Some(HsCode::normalize(&text).map_err(|e| fail(line, key, e.to_string()))?);
                }
            }
            "quantity" => quantity = Some(parse_number(raw).ok_or_else(|| fail(line, key, format!("bad number {raw:?}")))?),
            "value" => amount = Some(parse_number(raw).ok_or_else(|| fail(line, key, format!("bad number {raw:?}")))?),
            "currency" => currency = Some(unquote(raw).map_err(|m| fail(line, key, m))?),
            other => match other.strip_prefix("attr.") {
                Some(name) if is_valid_key(name) => {
                    attributes.insert(String::from(name), parse_attr_value(raw).map_err(|m| fail(line, key, m))?);
                }
                _ => return Err(fail(line, key, format!("unknown field {other:?}"))),
            },
        }
    }

    let start = block.start_line;
    let index = index.ok_or_else(|| fail(start, "index", String::from("missing index")))?;
    let description = description
        .filter(|d| !d.trim().is_empty())
        .ok_or_else(|| fail(start, "description", String::from("missing description")))?;
    Ok(LineItem {
        index,
        description,
        attributes,
        claimed_code,
        quantity: quantity.ok_or_else(|| fail(start, "quantity", String::from("missing quantity")))?,
        declared_value: Money {
            amount: amount.ok_or_else(|| fail(start, "value", String::from("missing value")))?,
            currency: currency.unwrap_or_else(|| String::from("MYR")),
        },
    })
}

fn parse_number(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|n| n.is_finite())
}

/// Removes surrounding double quotes and resolves `\"`, `\\` and `\n`.
fn unquote(raw: &str) -> Result<String, String> {
    let raw = raw.trim();
    let Some(inner) = raw.strip_prefix('"') else {
        return Ok(String::from(raw));
    };
    let mut out = String::new();
    let mut chars = inner.chars();
    loop {
        match chars.next() {
            None => return Err(String::from("unterminated quoted string")),
            Some('"') => {
                return if chars.as_str().trim().is_empty() {
                    Ok(out)
                } else {
                    Err(String::from("text after closing quote"))
                }
            }
            Some('\\') => match chars.next() {
                Some('n') => out.push('\n'),
                Some(c) => out.push(c),
                None => return Err(String::from("dangling escape")),
            },
            Some(c) => out.push(c),
        }
    }
}

fn parse_attr_value(raw: &str) -> Result<AttrValue, String> {
    let raw = raw.trim();
    if raw.starts_with('"') {
        return unquote(raw).map(AttrValue::Text);
    }
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or_else(|| String::from("unterminated list"))?;
        return split_list(inner).map(AttrValue::List);
    }
    Ok(match parse_number(raw) {
        Some(n) => AttrValue::Number(n),
        None => AttrValue::Text(String::from(raw)),
    })
}

fn split_list(inner: &str) -> Result<Vec<String>, String> {
    let mut items = Vec::new();
    if inner.trim().is_empty() {
        return Ok(items);
    }
    let mut rest = inner.trim();
    loop {
        let (item, after) = if rest.starts_with('"') {
            // Find the closing quote, honoring escapes.
            let mut end = None;
            let mut escaped = false;
            for (i, c) in rest.char_indices().skip(1) {
                match c {
                    _ if escaped => escaped = false,
                    '\\' => escaped = true,
                    '"' => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let end = end.ok_or_else(|| String::from("unterminated quoted list item"))?;
            (unquote(&rest[..=end])?, rest[end + 1..].trim_start())
        } else {
            match rest.find(',') {
                Some(i) => (String::from(rest[..i].trim()), &rest[i..]),
                None => (String::from(rest.trim()), ""),
            }
        };
        items.push(item);
        if after.is_empty() {
            return Ok(items);
        }
        rest = after.strip_prefix(',').ok_or_else(|| String::from("expected `,` between list items"))?.trim_start();
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty() || s.trim() != s || s.starts_with('"') || s.starts_with('[') || s.contains('\n') || s.contains('\r')
}

fn plain_or_quoted(s: &str) -> String {
    if needs_quotes(s) {
        quote(s)
    } else {
        String::from(s)
    }
}

fn render_attr(value: &AttrValue) -> String {
    match value {
        AttrValue::Number(n) => format!("{n}"),
        AttrValue::Text(s) if parse_number(s).is_some() => quote(s),
        AttrValue::Text(s) => plain_or_quoted(s),
        AttrValue::List(items) => {
            let inner: Vec<String> = items.iter().map(|i| quote(i)).collect();
            format!("[{}]", inner.join(", "))
        }
    }
}

/// Renders an application in the canonical text format.
pub fn render_application(app: &Application) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "app_id = {}", plain_or_quoted(&app.app_id));
    let _ = writeln!(out, "applicant = {}", plain_or_quoted(&app.applicant));
    let _ = writeln!(out, "revision = {}", app.revision);
    let _ = writeln!(out, "submitted_at = {}", app.submitted_at.to_rfc3339_opts(SecondsFormat::AutoSi, true));
    for item in &app.items {
        let _ = writeln!(out, "\n[item]");
        let _ = writeln!(out, "index = {}", item.index);
        let _ = writeln!(out, "description = {}", plain_or_quoted(&item.description));
        if let Some(code) = &item.claimed_code {
            let _ = writeln!(out, "claimed_code = {code}");
        }
        let _ = writeln!(out, "quantity = {}", item.quantity);
        let _ = writeln!(out, "value = {}", item.declared_value.amount);
        let _ = writeln!(out, "currency = {}", plain_or_quoted(&item.declared_value.currency));
        for (key, value) in &item.attributes {
            let _ = writeln!(out, "attr.{key} = {}", render_attr(value));
        }
    }
    out
}
