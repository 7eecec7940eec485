//! Fixture builders shared by unit tests.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::attrs::{AttrValue, Attributes};
use crate::hs::HsCode;
use crate::intake::{LineItem, Money};
use crate::kb::{
    parse_kb, ExemptionDoc, ExemptionEntryDoc, HeadingDoc, KbDocument, KbFormat, KnowledgeBase, NoteDoc, NoteKind,
    Section, Subheading, KB_FORMAT_TAG,
};

pub const GOLDEN_KB: &str = include_str!("../fixtures/golden_kb.json");

pub fn golden_kb() -> KnowledgeBase {
    parse_kb(GOLDEN_KB.as_bytes(), KbFormat::Json).expect("golden KB parses")
}

pub fn code(s: &str) -> HsCode {
    HsCode::normalize(s).unwrap()
}

pub struct KbBuilder {
    doc: KbDocument,
}

impl KbBuilder {
    pub fn new() -> Self {
        Self {
            doc: KbDocument {
                format: String::from(KB_FORMAT_TAG),
                version: String::from("1"),
                chapters: Default::default(),
                sections: Vec::new(),
                headings: Vec::new(),
                notes: Vec::new(),
                exemptions: Vec::new(),
                synonyms: Default::default(),
            },
        }
    }

    pub fn version(mut self, v: &str) -> Self {
        self.doc.version = v.to_string();
        self
    }

    pub fn heading(mut self, c: &str, terms: &[&str]) -> Self {
        self.doc.headings.push(HeadingDoc {
            code: code(c),
            terms: terms.iter().map(|t| t.to_string()).collect(),
            subheadings: Vec::new(),
        });
        self
    }

    /// Adds a subheading to the most recently added heading.
    pub fn sub(mut self, c: &str, terms: &[&str], residual: bool) -> Self {
        let code = code(c);
        let level = code.level();
        self.doc.headings.last_mut().expect("heading first").subheadings.push(Subheading {
            code,
            terms: terms.iter().map(|t| t.to_string()).collect(),
            level,
            is_residual: residual,
        });
        self
    }

    pub fn section(mut self, id: &str, chapters: &[&str]) -> Self {
        self.doc.sections.push(Section {
            id: id.to_string(),
            title: String::new(),
            chapters: chapters.iter().map(|c| c.to_string()).collect(),
        });
        self
    }

    pub fn note(mut self, id: &str, scope: &str, kind: NoteKind, condition: &str, redirect: Option<&str>) -> Self {
        self.doc.notes.push(NoteDoc {
            id: id.to_string(),
            label: None,
            scope: scope.to_string(),
            kind,
            condition: condition.to_string(),
            redirect: redirect.map(str::to_string),
            source_text: alloc::format!("Text of note {id}."),
            citation_uri: alloc::format!("kb://notes/{id}"),
            rationale: None,
        });
        self
    }

    pub fn exemption(mut self, list: &str, prefix: &str, condition: Option<&str>) -> Self {
        let entry = ExemptionEntryDoc { prefix: code(prefix), condition: condition.map(str::to_string) };
        match self.doc.exemptions.iter_mut().find(|l| l.id == list) {
            Some(l) => l.entries.push(entry),
            None => self.doc.exemptions.push(ExemptionDoc {
                id: list.to_string(),
                source: alloc::format!("kb://exemptions/{list}"),
                entries: alloc::vec![entry],
            }),
        }
        self
    }

    pub fn synonym(mut self, from: &str, to: &str) -> Self {
        self.doc.synonyms.insert(from.to_string(), to.to_string());
        self
    }

    pub fn document(self) -> KbDocument {
        self.doc
    }

    pub fn build(self) -> KnowledgeBase {
        KnowledgeBase::from_document(self.doc).expect("fixture KB is valid")
    }
}

pub fn attrs(pairs: &[(&str, AttrValue)]) -> Attributes {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn item(description: &str, pairs: &[(&str, AttrValue)]) -> LineItem {
    LineItem {
        index: 1,
        description: description.to_string(),
        attributes: attrs(pairs),
        claimed_code: None,
        quantity: 1.0,
        declared_value: Money { amount: 1.0, currency: String::from("MYR") },
    }
}

pub fn toy_item() -> LineItem {
    let mut it = item("Doraemon plastic figure (toy)", &[("category", AttrValue::text("toy"))]);
    it.claimed_code = Some(code("3926.90.0000"));
    it
}

pub fn handkerchief_item(side_cm: f64) -> LineItem {
    let mut it = item(
        "Woven cotton Handkerchief",
        &[("width_cm", AttrValue::Number(side_cm)), ("height_cm", AttrValue::Number(side_cm))],
    );
    it.claimed_code = Some(code("6213.00.0000"));
    it
}
