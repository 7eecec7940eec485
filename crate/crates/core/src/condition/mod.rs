//! The note-condition DSL.
//!
//! Legal notes carry a small boolean condition over item attributes, e.g.
//! `any_side_cm > 60` or `all(material = 'cotton', category contains 'handkerchief')`.
//!
//! ```text
//! cond    := or
//! or      := and ("or" and)*
//! and     := unary ("and" unary)*
//! unary   := "not" unary | primary
//! primary := "all(" cond ("," cond)* ")"
//!          | "any(" cond ("," cond)* ")"
//!          | "(" cond ")"
//!          | "category" "contains" string
//!          | "any_side_" unit op number
//!          | ident op literal
//! op      := "=" | "!=" | "≠" | "<" | "<=" | "≤" | ">" | ">=" | "≥" | "contains"
//! ```
//!
//! Chains of `and`/`or` parse to a single flat [`NoteCondition::All`] /
//! [`NoteCondition::Any`]. [`NoteCondition::render`] always emits the
//! function form, so `parse(render(c)) == c` for every condition.

mod eval;
mod parser;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use eval::{eval_condition, EvalOutcome};
pub use parser::{parse_condition, ConditionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Contains => "contains",
        }
    }

    /// Applies an ordering operator to two numbers. `Contains` never holds.
    pub fn compare_numbers(self, left: f64, right: f64) -> bool {
        match self {
            CompareOp::Eq => left == right,
            CompareOp::Ne => left != right,
            CompareOp::Lt => left < right,
            CompareOp::Le => left <= right,
            CompareOp::Gt => left > right,
            CompareOp::Ge => left >= right,
            CompareOp::Contains => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Text(String),
    Number(f64),
}

/// Condition AST.
#[derive(Debug, Clone, PartialEq)]
pub enum NoteCondition {
    Compare {
        attr: String,
        op: CompareOp,
        literal: Literal,
    },
    /// Holds when any dimensional attribute in `unit` satisfies `op threshold`.
    AnySide {
        op: CompareOp,
        threshold: f64,
        unit: String,
    },
    HasCategory(String),
    All(Vec<NoteCondition>),
    Any(Vec<NoteCondition>),
    Not(Box<NoteCondition>),
}

impl NoteCondition {
    pub fn parse(text: &str) -> Result<Self, ConditionError> {
        parse_condition(text)
    }

    /// Canonical source text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out).expect("writing to a String cannot fail");
        out
    }

    fn write_to(&self, out: &mut String) -> fmt::Result {
        match self {
            NoteCondition::Compare { attr, op, literal } => {
                write!(out, "{attr} {} ", op.symbol())?;
                write_literal(out, literal)
            }
            NoteCondition::AnySide { op, threshold, unit } => {
                write!(out, "any_side_{unit} {} {threshold}", op.symbol())
            }
            NoteCondition::HasCategory(category) => {
                out.push_str("category contains ");
                write_literal(out, &Literal::Text(category.clone()))
            }
            NoteCondition::All(children) | NoteCondition::Any(children) => {
                out.push_str(if matches!(self, NoteCondition::All(_)) { "all(" } else { "any(" });
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    child.write_to(out)?;
                }
                out.push(')');
                Ok(())
            }
            NoteCondition::Not(child) => {
                out.push_str("not (");
                child.write_to(out)?;
                out.push(')');
                Ok(())
            }
        }
    }

    /// Depth of the AST; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            NoteCondition::All(c) | NoteCondition::Any(c) => {
                1 + c.iter().map(NoteCondition::depth).max().unwrap_or(0)
            }
            NoteCondition::Not(c) => 1 + c.depth(),
            _ => 1,
        }
    }
}

fn write_literal(out: &mut String, literal: &Literal) -> fmt::Result {
    match literal {
        Literal::Number(n) => write!(out, "{n}"),
        Literal::Text(s) => {
            out.push('\'');
            for c in s.chars() {
                if c == '\'' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('\'');
            Ok(())
        }
    }
}

impl fmt::Display for NoteCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for NoteCondition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for NoteCondition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        parse_condition(&s).map_err(serde::de::Error::custom)
    }
}
