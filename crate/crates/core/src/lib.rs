//! Harmonized System classification and tariff-exemption verification.
//!
//! This crate is the pure algorithmic core: it performs no IO and needs only
//! `alloc`. File handling, persistence, the HTTP service and the CLI live in
//! the `gpva` companion crate.
//!
//! The main pieces are:
//!
//! - [`hs`]: normalized HS codes.
//! - [`condition`]: the note-condition DSL (parser, renderer, evaluator).
//! - [`kb`]: the regulatory knowledge base (headings, legal notes, exemption lists).
//! - [`gir`]: the classification engine applying the General Interpretative Rules.
//! - [`intake`]: application line items, the canonical application format and
//!   the extraction adapter seam.
//! - [`verify`]: line-by-line verification producing explainable findings.
//! - [`caseflow`]: the case state machine with an append-only audit trail.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod attrs;
pub mod caseflow;

pub mod condition;
pub mod gir;
pub mod hs;
pub mod intake;
pub mod kb;
pub mod text;
pub mod verify;

#[cfg(test)]
mod testkit;

pub use attrs::{AttrValue, Attributes};
pub use hs::{HsCode, HsCodeError};
