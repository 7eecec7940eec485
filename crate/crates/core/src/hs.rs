//! Harmonized System codes.
//!
//! An [`HsCode`] is a normalized string of 4, 6, 8 or 10 decimal digits. The
//! first two digits name the chapter, the first four the heading and the
//! first six the subheading; any remaining digits are the national suffix.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HsCodeError {
    #[error("empty HS code")]
    Empty,
    #[error("non-digit character {found:?} at offset {offset}")]
    NonDigit { found: char, offset: usize },
    #[error("HS code must have 4, 6, 8 or 10 digits, got {0}")]
    BadLength(usize),
}

/// A normalized HS code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HsCode(String);

impl HsCode {
    /// Normalizes `text` into a code.
    ///
    /// Dots and whitespace are stripped; every other character must be a
    /// decimal digit. All digits are preserved.
    pub fn normalize(text: &str) -> Result<Self, HsCodeError> {
        let mut digits = String::with_capacity(text.len());
        for (offset, c) in text.char_indices() {
            match c {
                '0'..='9' => digits.push(c),
                '.' => {}
                c if c.is_whitespace() => {}
                found => return Err(HsCodeError::NonDigit { found, offset }),
            }
        }
        if digits.is_empty() {
            return Err(HsCodeError::Empty);
        }
        match digits.len() {
            4 | 6 | 8 | 10 => Ok(Self(digits)),
            n => Err(HsCodeError::BadLength(n)),
        }
    }

    pub fn digits(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chapter(&self) -> &str {
        &self.0[..2]
    }

    pub fn heading(&self) -> &str {
        &self.0[..4]
    }

    pub fn subheading(&self) -> Option<&str> {
        self.0.get(..6)
    }

    pub fn national_suffix(&self) -> Option<&str> {
        self.0.get(6..)
    }

    /// The 4-digit heading this code belongs to.
    pub fn heading_code(&self) -> HsCode {
        HsCode(String::from(self.heading()))
    }

    pub fn is_heading(&self) -> bool {
        self.0.len() == 4
    }

    /// Nesting level below the heading: 0 for a heading, 1 for a 6-digit
    /// subheading, 2 for 8 digits, 3 for 10 digits.
    pub fn level(&self) -> u8 {
        ((self.0.len() - 4) / 2) as u8
    }

    /// True when `self` is a (non-strict) digit prefix of `other`.
    pub fn is_prefix_of(&self, other: &HsCode) -> bool {
        other.0.starts_with(self.0.as_str())
    }

    pub fn same_heading(&self, other: &HsCode) -> bool {
        self.heading() == other.heading()
    }

    /// Numeric value of the code, right-padded to ten digits so codes of
    /// different lengths order by position in the nomenclature.
    pub fn numeric(&self) -> u64 {
        let mut value: u64 = 0;
        for b in self.0.bytes() {
            value = value * 10 + u64::from(b - b'0');
        }
        for _ in self.0.len()..10 {
            value *= 10;
        }
        value
    }
}

/// Dotted rendering: `62.14`, `3926.90`, `3926.90.00`, `3926.90.0000`.
impl fmt::Display for HsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.0;
        match d.len() {
            4 => write!(f, "{}.{}", &d[..2], &d[2..]),
            _ => write!(f, "{}.{}", &d[..4], &d[4..6]).and_then(|()| match d.get(6..) {
                Some(rest) if !rest.is_empty() => write!(f, ".{rest}"),
                _ => Ok(()),
            }),
        }
    }
}

impl FromStr for HsCode {
    type Err = HsCodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::normalize(s)
    }
}

impl Serialize for HsCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for HsCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        HsCode::normalize(&s).map_err(serde::de::Error::custom)
    }
}
