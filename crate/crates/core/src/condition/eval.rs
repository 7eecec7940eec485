use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{CompareOp, Literal, NoteCondition};
use crate::attrs::{AttrValue, Attributes};

/// Three-valued intermediate result; `Unknown` comes from missing attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

/// Result of evaluating a condition against an attribute map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalOutcome {
    /// Root value, with "unknown" collapsed to `false`.
    pub matched: bool,
    /// The root value was unknown: the outcome depends on missing evidence.
    pub undetermined: bool,
    /// Some leaf referenced a missing attribute.
    pub evidence_incomplete: bool,
    /// Rendered leaf clauses that held.
    pub matched_clauses: Vec<String>,
    /// Attribute names that were needed but absent, sorted.
    pub missing: Vec<String>,
}

struct Evaluator<'a> {
    attrs: &'a Attributes,
    matched: Vec<String>,
    missing: BTreeSet<String>,
}

/// Evaluates `cond` over `attrs`.
///
/// Total and pure. Every leaf is visited (no short-circuit), so the
/// `evidence_incomplete` flag and the clause lists do not depend on child
/// order. Missing attributes make a leaf unknown; unknown propagates with
/// Kleene semantics and becomes `false` at the root.
pub fn eval_condition(cond: &NoteCondition, attrs: &Attributes) -> EvalOutcome {
    let mut ev = Evaluator { attrs, matched: Vec::new(), missing: BTreeSet::new() };
    let root = ev.eval(cond);
    EvalOutcome {
        matched: root == Truth::True,
        undetermined: root == Truth::Unknown,
        evidence_incomplete: !ev.missing.is_empty(),
        matched_clauses: ev.matched,
        missing: ev.missing.into_iter().collect(),
    }
}

impl Evaluator<'_> {
    fn eval(&mut self, cond: &NoteCondition) -> Truth {
        let leaf = match cond {
            NoteCondition::All(children) => {
                let values: Vec<Truth> = children.iter().map(|c| self.eval(c)).collect();
                return if values.contains(&Truth::False) {
                    Truth::False
                } else if values.contains(&Truth::Unknown) {
                    Truth::Unknown
                } else {
                    Truth::True
                };
            }
            NoteCondition::Any(children) => {
                let values: Vec<Truth> = children.iter().map(|c| self.eval(c)).collect();
                return if values.contains(&Truth::True) {
                    Truth::True
                } else if values.contains(&Truth::Unknown) {
                    Truth::Unknown
                } else {
                    Truth::False
                };
            }
            NoteCondition::Not(child) => {
                return match self.eval(child) {
                    Truth::True => Truth::False,
                    Truth::False => Truth::True,
                    Truth::Unknown => Truth::Unknown,
                };
            }
            NoteCondition::Compare { attr, op, literal } => match self.attrs.get(attr) {
                None => {
                    self.missing.insert(attr.clone());
                    Truth::Unknown
                }
                Some(value) => compare(value, *op, literal).into(),
            },
            NoteCondition::HasCategory(category) => match self.attrs.get("category") {
                None => {
                    self.missing.insert(String::from("category"));
                    Truth::Unknown
                }
                Some(value) => value.items().iter().any(|c| eq_ci(c, category)).into(),
            },
            NoteCondition::AnySide { op, threshold, unit } => {
                let sides = dimensions(self.attrs, unit);
                if sides.is_empty() {
                    self.missing.insert(format!("any_side_{unit}"));
                    Truth::Unknown
                } else {
                    sides.iter().any(|side| op.compare_numbers(*side, *threshold)).into()
                }
            }
        };
        if leaf == Truth::True {
            self.matched.push(cond.render());
        }
        leaf
    }
}

/// Numeric attributes whose last key segment ends in `_<unit>`.
fn dimensions(attrs: &Attributes, unit: &str) -> Vec<f64> {
    let suffix = format!("_{unit}");
    attrs
        .iter()
        .filter(|(key, _)| {
            let last = key.rsplit('.').next().unwrap_or(key);
            last.ends_with(&suffix) && !last.starts_with("any_side_")
        })
        .filter_map(|(_, v)| v.as_number())
        .collect()
}

fn eq_ci(a: &str, b: &str) -> bool {
    a.trim().to_lowercase() == b.trim().to_lowercase()
}

fn compare(value: &AttrValue, op: CompareOp, literal: &Literal) -> bool {
    match literal {
        Literal::Number(n) => match value.as_number() {
            Some(v) => op.compare_numbers(v, *n),
            None => false,
        },
        Literal::Text(t) => {
            let numeric = t.trim().parse::<f64>().ok().filter(|n| n.is_finite());
            match (op, value) {
                (CompareOp::Contains, AttrValue::Text(s)) => s.to_lowercase().contains(&t.to_lowercase()),
                (CompareOp::Contains, AttrValue::List(items)) => items.iter().any(|i| eq_ci(i, t)),
                (CompareOp::Contains, AttrValue::Number(_)) => false,
                (CompareOp::Eq | CompareOp::Ne, _) => {
                    let equal = match (value, numeric) {
                        (AttrValue::Number(v), Some(n)) => *v == n,
                        (AttrValue::Number(_), None) => false,
                        _ => value.items().iter().any(|i| eq_ci(i, t)),
                    };
                    equal == (op == CompareOp::Eq)
                }
                (_, _) => match (value.as_number(), numeric) {
                    (Some(v), Some(n)) => op.compare_numbers(v, n),
                    _ => false,
                },
            }
        }
    }
}
