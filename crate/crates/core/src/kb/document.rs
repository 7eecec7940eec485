//! Canonical KB file format (JSON, self-describing via the `format` field).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    ExemptionEntry, ExemptionList, Heading, KbError, KbVersion, KnowledgeBase, LegalNote, NoteKind, NoteScope,
    Redirect, Section, Subheading,
};
use crate::condition::parse_condition;
use crate::hs::HsCode;

pub const KB_FORMAT_TAG: &str = "gpva-kb/1";

/// Declared input format for [`parse_kb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbFormat {
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    pub format: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub chapters: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<Section>,
    pub headings: Vec<HeadingDoc>,
    #[serde(default)]
    pub notes: Vec<NoteDoc>,
    #[serde(default)]
    pub exemptions: Vec<ExemptionDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub synonyms: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadingDoc {
    pub code: HsCode,
    pub terms: Vec<String>,
    #[serde(default)]
    pub subheadings: Vec<Subheading>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub scope: String,
    pub kind: NoteKind,
    pub condition: String,
    #[serde(default)]
    pub redirect: Option<String>,
    pub source_text: String,
    pub citation_uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExemptionDoc {
    pub id: String,
    pub source: String,
    pub entries: Vec<ExemptionEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExemptionEntryDoc {
    pub prefix: HsCode,
    #[serde(default)]
    pub condition: Option<String>,
}

/// Parses and validates a KB document.
pub fn parse_kb(document: &[u8], format: KbFormat) -> Result<KnowledgeBase, KbError> {
    match format {
        KbFormat::Json => {}
    }
    let doc: KbDocument = serde_json::from_slice(document).map_err(|e| KbError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    KnowledgeBase::from_document(doc)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => String::from(&message[..i]),
        None => String::from(message),
    }
}

fn parse_scope(note_id: &str, scope: &str) -> Result<NoteScope, KbError> {
    let bad = || KbError::BadScope { note_id: String::from(note_id), scope: String::from(scope) };
    let (kind, value) = scope.split_once(':').ok_or_else(bad)?;
    let value = value.trim();
    match kind.trim() {
        "section" if !value.is_empty() => Ok(NoteScope::Section(String::from(value))),
        "chapter" if value.len() == 2 && value.bytes().all(|b| b.is_ascii_digit()) => {
            Ok(NoteScope::Chapter(String::from(value)))
        }
        "heading" => match HsCode::normalize(value) {
            Ok(code) if code.is_heading() => Ok(NoteScope::Heading(code)),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

impl KnowledgeBase {
    pub fn from_document(doc: KbDocument) -> Result<Self, KbError> {
        if doc.format != KB_FORMAT_TAG {
            return Err(KbError::UnsupportedFormat(doc.format));
        }
        let version = KbVersion::parse(&doc.version)?;
        if doc.headings.is_empty() {
            return Err(KbError::NoHeadings);
        }

        let mut headings = BTreeMap::new();
        for h in doc.headings {
            if !h.code.is_heading() {
                return Err(KbError::BadHeadingCode(h.code));
            }
            if h.terms.iter().all(|t| t.trim().is_empty()) {
                return Err(KbError::EmptyTerms(h.code));
            }
            validate_subheadings(&h)?;
            if headings.contains_key(&h.code) {
                return Err(KbError::DuplicateHeading(h.code));
            }
            headings.insert(h.code.clone(), Heading { code: h.code, terms: h.terms, subheadings: h.subheadings });
        }

        let section_ids: BTreeSet<&str> = doc.sections.iter().map(|s| s.id.as_str()).collect();
        let mut note_ids = BTreeSet::new();
        let mut notes = Vec::with_capacity(doc.notes.len());
        for n in doc.notes {
            if !note_ids.insert(n.id.clone()) {
                return Err(KbError::DuplicateNote(n.id));
            }
            let scope = parse_scope(&n.id, &n.scope)?;
            match &scope {
                NoteScope::Section(s) if !section_ids.contains(s.as_str()) => {
                    return Err(KbError::BadScope { note_id: n.id, scope: n.scope });
                }
                NoteScope::Heading(h) if !headings.contains_key(h) => {
                    return Err(KbError::BadScope { note_id: n.id, scope: n.scope });
                }
                _ => {}
            }
            let condition = parse_condition(&n.condition).map_err(|e| KbError::Condition {
                note_id: n.id.clone(),
                offset: e.offset(),
                message: e.to_string(),
            })?;
            let redirect = match n.redirect.as_deref().map(str::trim) {
                None => None,
                Some("elsewhere") => Some(Redirect::Elsewhere),
                Some(target) => {
                    let code = HsCode::normalize(target).map_err(|_| KbError::BadRedirect {
                        note_id: n.id.clone(),
                        target: String::from(target),
                    })?;
                    // Chapter and section notes move goods between headings;
                    // subheading notes move them between subheadings of their heading.
                    let resolves = match (&scope, headings.get(&code.heading_code())) {
                        (NoteScope::Heading(h), Some(heading)) => {
                            code.heading() == h.digits() && heading.subheadings.iter().any(|s| s.code == code)
                        }
                        (_, Some(_)) => code.is_heading(),
                        (_, None) => false,
                    };
                    if !resolves {
                        return Err(KbError::DanglingRedirect { note_id: n.id, target: code });
                    }
                    Some(Redirect::Code(code))
                }
            };
            if n.kind == NoteKind::Exclusion && redirect.is_none() {
                return Err(KbError::ExclusionWithoutRedirect(n.id));
            }
            notes.push(LegalNote {
                id: n.id,
                label: n.label,
                scope,
                kind: n.kind,
                condition,
                redirect,
                source_text: n.source_text,
                citation_uri: n.citation_uri,
                rationale: n.rationale,
            });
        }

        let mut exemptions = BTreeMap::new();
        for list in doc.exemptions {
            let mut seen = BTreeSet::new();
            let mut entries = Vec::with_capacity(list.entries.len());
            for e in list.entries {
                if !matches!(e.prefix.len(), 4 | 6) {
                    return Err(KbError::BadExemptionPrefix { list: list.id, prefix: e.prefix });
                }
                if !seen.insert(e.prefix.clone()) {
                    return Err(KbError::DuplicateExemptionPrefix { list: list.id, prefix: e.prefix });
                }
                let condition = match e.condition {
                    None => None,
                    Some(src) => Some(parse_condition(&src).map_err(|err| KbError::ExemptionCondition {
                        list: list.id.clone(),
                        prefix: e.prefix.clone(),
                        offset: err.offset(),
                        message: err.to_string(),
                    })?),
                };
                entries.push(ExemptionEntry { prefix: e.prefix, condition });
            }
            if exemptions.contains_key(&list.id) {
                return Err(KbError::DuplicateExemptionList(list.id));
            }
            exemptions.insert(list.id.clone(), ExemptionList { id: list.id, source: list.source, entries });
        }

        let synonyms = doc
            .synonyms
            .into_iter()
            .map(|(k, v)| (crate::text::singularize(&k.to_lowercase()), crate::text::singularize(&v.to_lowercase())))
            .collect();

        Ok(KnowledgeBase {
            version,
            headings,
            notes,
            exemptions,
            sections: doc.sections,
            chapter_titles: doc.chapters,
            synonyms,
        })
    }

    /// Renders the snapshot back into the canonical document.
    pub fn to_document(&self) -> KbDocument {
        KbDocument {
            format: String::from(KB_FORMAT_TAG),
            version: String::from(self.version.as_str()),
            chapters: self.chapter_titles.clone(),
            sections: self.sections.clone(),
            headings: self
                .headings
                .values()
                .map(|h| HeadingDoc { code: h.code.clone(), terms: h.terms.clone(), subheadings: h.subheadings.clone() })
                .collect(),
            notes: self
                .notes
                .iter()
                .map(|n| NoteDoc {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    scope: n.scope.to_string(),
                    kind: n.kind,
                    condition: n.condition.render(),
                    redirect: n.redirect.as_ref().map(|r| match r {
                        Redirect::Code(c) => String::from(c.digits()),
                        Redirect::Elsewhere => String::from("elsewhere"),
                    }),
                    source_text: n.source_text.clone(),
                    citation_uri: n.citation_uri.clone(),
                    rationale: n.rationale.clone(),
                })
                .collect(),
            exemptions: self
                .exemptions
                .values()
                .map(|l| ExemptionDoc {
                    id: l.id.clone(),
                    source: l.source.clone(),
                    entries: l
                        .entries
                        .iter()
                        .map(|e| ExemptionEntryDoc {
                            prefix: e.prefix.clone(),
                            condition: e.condition.as_ref().map(|c| c.render()),
                        })
                        .collect(),
                })
                .collect(),
            synonyms: self.synonyms.clone(),
        }
    }
}

fn validate_subheadings(h: &HeadingDoc) -> Result<(), KbError> {
    let bad = |code: &HsCode, reason| KbError::BadSubheading { heading: h.code.clone(), code: code.clone(), reason };
    let mut seen = BTreeSet::new();
    for s in &h.subheadings {
        if s.code.is_heading() || !h.code.is_prefix_of(&s.code) {
            return Err(bad(&s.code, "code must extend the heading code"));
        }
        if s.level != s.code.level() {
            return Err(bad(&s.code, "level inconsistent with code length"));
        }
        if s.terms.iter().all(|t| t.trim().is_empty()) {
            return Err(bad(&s.code, "no terms"));
        }
        if !seen.insert(s.code.clone()) {
            return Err(bad(&s.code, "duplicate subheading"));
        }
        if s.code.len() > 6 && !h.subheadings.iter().any(|p| p.code.len() == 6 && p.code.is_prefix_of(&s.code)) {
            return Err(bad(&s.code, "deeper subheading without a 6-digit parent"));
        }
    }
    let heading = Heading { code: h.code.clone(), terms: h.terms.clone(), subheadings: h.subheadings.clone() };
    for s in &h.subheadings {
        let parent = heading.parent_of(&s.code).cloned();
        let residuals = h
            .subheadings
            .iter()
            .filter(|o| o.is_residual && heading.parent_of(&o.code).cloned() == parent)
            .count();
        if residuals > 1 {
            return Err(bad(&s.code, "more than one residual entry among siblings"));
        }
    }
    Ok(())
}
