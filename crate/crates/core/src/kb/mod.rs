//! The regulatory knowledge base.
//!
//! A [`KnowledgeBase`] is an immutable snapshot of the tariff nomenclature
//! (headings and their subheadings), the legal notes that include, exclude
//! or redirect goods, and the exemption lists. It is built from the
//! canonical JSON document by [`parse_kb`], which enforces every structural
//! invariant before a snapshot exists.

mod document;
mod exemption;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::condition::NoteCondition;
use crate::hs::HsCode;

pub use document::{parse_kb, ExemptionDoc, ExemptionEntryDoc, HeadingDoc, KbDocument, KbFormat, NoteDoc, KB_FORMAT_TAG};
pub use exemption::{ConditionalOutcome, ExemptionEntry, ExemptionList, ExemptionStatus};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("unsupported KB format {0:?}")]
    UnsupportedFormat(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("no headings")]
    NoHeadings,
    #[error("bad version {0:?}: expected dot-separated integers")]
    BadVersion(String),
    #[error("heading code {0} must have exactly 4 digits")]
    BadHeadingCode(HsCode),
    #[error("duplicate heading code {0}")]
    DuplicateHeading(HsCode),
    #[error("heading {0} has no terms")]
    EmptyTerms(HsCode),
    #[error("subheading {code} under heading {heading}: {reason}")]
    BadSubheading { heading: HsCode, code: HsCode, reason: &'static str },
    #[error("duplicate note id {0}")]
    DuplicateNote(String),
    #[error("note {note_id}: bad scope {scope:?}")]
    BadScope { note_id: String, scope: String },
    #[error("note {note_id}: condition error at offset {offset}: {message}")]
    Condition { note_id: String, offset: usize, message: String },
    #[error("note {note_id}: bad redirect {target:?}")]
    BadRedirect { note_id: String, target: String },
    #[error("note {note_id}: redirect {target} does not resolve to a heading")]
    DanglingRedirect { note_id: String, target: HsCode },
    #[error("exclusion note {0} needs a redirect or \"elsewhere\"")]
    ExclusionWithoutRedirect(String),
    #[error("duplicate exemption list {0}")]
    DuplicateExemptionList(String),
    #[error("exemption list {list}: prefix {prefix} must have 4 or 6 digits")]
    BadExemptionPrefix { list: String, prefix: HsCode },
    #[error("exemption list {list}: duplicate prefix {prefix}")]
    DuplicateExemptionPrefix { list: String, prefix: HsCode },
    #[error("exemption list {list}, prefix {prefix}: condition error at offset {offset}: {message}")]
    ExemptionCondition { list: String, prefix: HsCode, offset: usize, message: String },
    #[error("unknown heading or chapter {0:?}")]
    UnknownHeading(String),
}

/// KB version: dot-separated integers compared component-wise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KbVersion(String);

impl KbVersion {
    pub fn parse(text: &str) -> Result<Self, KbError> {
        let ok = !text.is_empty()
            && text.split('.').all(|p| !p.is_empty() && p.len() <= 18 && p.bytes().all(|b| b.is_ascii_digit()));
        if ok {
            Ok(Self(String::from(text)))
        } else {
            Err(KbError::BadVersion(String::from(text)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn components(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.split('.').map(|p| p.parse::<u64>().unwrap_or(0))
    }
}

impl Ord for KbVersion {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.components();
        let mut b = other.components();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return self.0.cmp(&other.0),
                (x, y) => match x.unwrap_or(0).cmp(&y.unwrap_or(0)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for KbVersion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KbVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subheading {
    pub code: HsCode,
    pub terms: Vec<String>,
    pub level: u8,
    #[serde(default)]
    pub is_residual: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heading {
    pub code: HsCode,
    pub terms: Vec<String>,
    pub subheadings: Vec<Subheading>,
}

impl Heading {
    pub fn chapter(&self) -> &str {
        self.code.chapter()
    }

    /// Short label used in explanations: the first term.
    pub fn label(&self) -> &str {
        self.terms.first().map_or("", String::as_str)
    }

    /// Direct children of `parent` in the subheading tree; `None` means the
    /// heading itself. A subheading's parent is the longest proper prefix
    /// among the other subheadings, or the heading when there is none.
    pub fn children_of(&self, parent: Option<&HsCode>) -> Vec<&Subheading> {
        self.subheadings
            .iter()
            .filter(|s| self.parent_of(&s.code) == parent)
            .collect()
    }

    pub fn parent_of(&self, code: &HsCode) -> Option<&HsCode> {
        self.subheadings
            .iter()
            .filter(|s| s.code.len() < code.len() && s.code.is_prefix_of(code))
            .max_by_key(|s| s.code.len())
            .map(|s| &s.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteKind {
    Exclusion,
    Inclusion,
    Definition,
}

/// What a note applies to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NoteScope {
    Section(String),
    Chapter(String),
    /// Subheading note: applies among the subheadings of one heading.
    Heading(HsCode),
}

impl fmt::Display for NoteScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoteScope::Section(s) => write!(f, "section:{s}"),
            NoteScope::Chapter(c) => write!(f, "chapter:{c}"),
            NoteScope::Heading(h) => write!(f, "heading:{}", h.digits()),
        }
    }
}

/// Where goods matched by a note are sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Redirect {
    Code(HsCode),
    /// Classified elsewhere, destination undetermined.
    Elsewhere,
}

impl Redirect {
    pub fn code(&self) -> Option<&HsCode> {
        match self {
            Redirect::Code(c) => Some(c),
            Redirect::Elsewhere => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegalNote {
    pub id: String,
    /// Human citation label, e.g. "Note 2(y) to Chapter 39".
    pub label: Option<String>,
    pub scope: NoteScope,
    pub kind: NoteKind,
    pub condition: NoteCondition,
    pub redirect: Option<Redirect>,
    pub source_text: String,
    pub citation_uri: String,
    /// Authored one-sentence reasoning used when this note decides a case.
    pub rationale: Option<String>,
}

impl LegalNote {
    pub fn display_label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub chapters: Vec<String>,
}

/// Immutable, validated knowledge-base snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    version: KbVersion,
    headings: BTreeMap<HsCode, Heading>,
    notes: Vec<LegalNote>,
    exemptions: BTreeMap<String, ExemptionList>,
    sections: Vec<Section>,
    chapter_titles: BTreeMap<String, String>,
    synonyms: BTreeMap<String, String>,
}

impl KnowledgeBase {
    pub fn version(&self) -> &KbVersion {
        &self.version
    }

    pub fn headings(&self) -> impl Iterator<Item = &Heading> {
        self.headings.values()
    }

    pub fn heading(&self, code: &HsCode) -> Option<&Heading> {
        self.headings.get(&code.heading_code())
    }

    pub fn heading_count(&self) -> usize {
        self.headings.len()
    }

    pub fn notes(&self) -> &[LegalNote] {
        &self.notes
    }

    pub fn note(&self, id: &str) -> Option<&LegalNote> {
        self.notes.iter().find(|n| n.id == id)
    }

    pub fn exemptions(&self) -> impl Iterator<Item = &ExemptionList> {
        self.exemptions.values()
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn chapter_title(&self, chapter: &str) -> Option<&str> {
        self.chapter_titles.get(chapter).map(String::as_str)
    }

    /// Synonym table carried by the KB (token → canonical token).
    pub fn synonyms(&self) -> &BTreeMap<String, String> {
        &self.synonyms
    }

    fn sections_of(&self, chapter: &str) -> impl Iterator<Item = &Section> {
        let chapter = String::from(chapter);
        self.sections.iter().filter(move |s| s.chapters.contains(&chapter))
    }

    /// Section and chapter notes applicable to a heading (`"3926"`, `"39.26"`)
    /// or chapter (`"39"`): all section-scope notes first, then chapter-scope
    /// notes, each group ordered by note id.
    pub fn notes_for(&self, heading_or_chapter: &str) -> Result<Vec<&LegalNote>, KbError> {
        let unknown = || KbError::UnknownHeading(String::from(heading_or_chapter));
        let digits: String = heading_or_chapter.chars().filter(|c| *c != '.' && !c.is_whitespace()).collect();
        let chapter = match digits.len() {
            2 if digits.bytes().all(|b| b.is_ascii_digit()) => {
                if !self.headings.keys().any(|h| h.chapter() == digits) {
                    return Err(unknown());
                }
                digits
            }
            _ => {
                let code = HsCode::normalize(&digits).map_err(|_| unknown())?;
                if !self.headings.contains_key(&code.heading_code()) {
                    return Err(unknown());
                }
                String::from(code.chapter())
            }
        };
        Ok(self.chapter_notes(&chapter))
    }

    pub(crate) fn chapter_notes(&self, chapter: &str) -> Vec<&LegalNote> {
        let section_ids: Vec<&str> = self.sections_of(chapter).map(|s| s.id.as_str()).collect();
        let mut section_notes: Vec<&LegalNote> = self
            .notes
            .iter()
            .filter(|n| matches!(&n.scope, NoteScope::Section(s) if section_ids.contains(&s.as_str())))
            .collect();
        let mut chapter_notes: Vec<&LegalNote> = self
            .notes
            .iter()
            .filter(|n| matches!(&n.scope, NoteScope::Chapter(c) if c == chapter))
            .collect();
        section_notes.sort_by(|a, b| a.id.cmp(&b.id));
        chapter_notes.sort_by(|a, b| a.id.cmp(&b.id));
        section_notes.extend(chapter_notes);
        section_notes
    }

    /// Subheading notes of a heading, ordered by id.
    pub fn subheading_notes(&self, heading: &HsCode) -> Vec<&LegalNote> {
        let heading = heading.heading_code();
        let mut notes: Vec<&LegalNote> =
            self.notes.iter().filter(|n| n.scope == NoteScope::Heading(heading.clone())).collect();
        notes.sort_by(|a, b| a.id.cmp(&b.id));
        notes
    }

    /// SHA-256 over the canonical serialization; equal snapshots hash equal.
    pub fn fingerprint(&self) -> String {
        use sha2::Digest;
        let bytes = serde_json::to_vec(&self.to_document()).expect("KB document always serializes");
        hex::encode(sha2::Sha256::digest(&bytes))
    }
}
