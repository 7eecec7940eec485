use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::{CompareOp, Literal, NoteCondition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditionError {
    #[error("empty condition")]
    Empty,
    #[error("unknown operator {found:?} at offset {offset}")]
    UnknownOperator { offset: usize, found: String },
    #[error("unbalanced parentheses at offset {offset}")]
    UnbalancedParens { offset: usize },
    #[error("bad number literal {text:?} at offset {offset}")]
    BadNumber { offset: usize, text: String },
    #[error("unterminated string starting at offset {offset}")]
    UnterminatedString { offset: usize },
    #[error("expected {expected} at offset {offset}")]
    Unexpected { offset: usize, expected: &'static str },
}

impl ConditionError {
    pub fn offset(&self) -> usize {
        match self {
            ConditionError::Empty => 0,
            ConditionError::UnknownOperator { offset, .. }
            | ConditionError::UnbalancedParens { offset }
            | ConditionError::BadNumber { offset, .. }
            | ConditionError::UnterminatedString { offset }
            | ConditionError::Unexpected { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Op(CompareOp),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(input: &str) -> Result<Vec<Token>, ConditionError> {
    let mut tokens = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        let simple = |tok| Token { tok, offset };
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(simple(Tok::LParen));
            }
            ')' => {
                chars.next();
                tokens.push(simple(Tok::RParen));
            }
            ',' => {
                chars.next();
                tokens.push(simple(Tok::Comma));
            }
            '=' => {
                chars.next();
                if matches!(chars.peek(), Some((_, '='))) {
                    chars.next();
                }
                tokens.push(simple(Tok::Op(CompareOp::Eq)));
            }
            '≠' => {
                chars.next();
                tokens.push(simple(Tok::Op(CompareOp::Ne)));
            }
            '≤' => {
                chars.next();
                tokens.push(simple(Tok::Op(CompareOp::Le)));
            }
            '≥' => {
                chars.next();
                tokens.push(simple(Tok::Op(CompareOp::Ge)));
            }
            '!' | '<' | '>' => {
                chars.next();
                let eq = matches!(chars.peek(), Some((_, '=')));
                if eq {
                    chars.next();
                }
                let op = match (c, eq) {
                    ('!', true) => CompareOp::Ne,
                    ('<', false) => CompareOp::Lt,
                    ('<', true) => CompareOp::Le,
                    ('>', false) => CompareOp::Gt,
                    ('>', true) => CompareOp::Ge,
                    _ => {
                        return Err(ConditionError::UnknownOperator {
                            offset,
                            found: String::from("!"),
                        })
                    }
                };
                tokens.push(simple(Tok::Op(op)));
            }
            '\'' | '"' => {
                chars.next();
                let mut s = String::new();
                let mut closed = false;
                while let Some((_, ch)) = chars.next() {
                    match ch {
                        '\\' => match chars.next() {
                            Some((_, escaped)) => s.push(escaped),
                            None => break,
                        },
                        ch if ch == c => {
                            closed = true;
                            break;
                        }
                        ch => s.push(ch),
                    }
                }
                if !closed {
                    return Err(ConditionError::UnterminatedString { offset });
                }
                tokens.push(simple(Tok::Str(s)));
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut text = String::new();
                let mut prev = '\0';
                while let Some(&(_, ch)) = chars.peek() {
                    let sign_ok = (ch == '-' || ch == '+') && (text.is_empty() || prev == 'e' || prev == 'E');
                    if ch.is_ascii_alphanumeric() || ch == '.' || sign_ok {
                        text.push(ch);
                        prev = ch;
                        chars.next();
                    } else {
                        break;
                    }
                }
                let value = parse_number(&text).ok_or(ConditionError::BadNumber { offset, text })?;
                tokens.push(simple(Tok::Num(value)));
            }
            c if is_ident_start(c) => {
                let mut ident = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if is_ident_char(ch) {
                        ident.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if ident == "contains" {
                    tokens.push(simple(Tok::Op(CompareOp::Contains)));
                } else {
                    tokens.push(simple(Tok::Ident(ident)));
                }
            }
            other => {
                let mut found = String::new();
                found.push(other);
                return Err(ConditionError::UnknownOperator { offset, found });
            }
        }
    }
    Ok(tokens)
}

/// Strict decimal grammar: `-?digits(.digits)?([eE][+-]?digits)?`.
fn parse_number(text: &str) -> Option<f64> {
    let bytes = text.as_bytes();
    let mut i = 0;
    if bytes.first() == Some(&b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == int_start {
        return None;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == frac_start {
            return None;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != bytes.len() {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        tok
    }

    fn peek_keyword(&self, keyword: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == keyword)
    }

    fn parse_or(&mut self) -> Result<NoteCondition, ConditionError> {
        let mut terms = alloc::vec![self.parse_and()?];
        while self.peek_keyword("or") {
            self.pos += 1;
            terms.push(self.parse_and()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { NoteCondition::Any(terms) })
    }

    fn parse_and(&mut self) -> Result<NoteCondition, ConditionError> {
        let mut terms = alloc::vec![self.parse_unary()?];
        while self.peek_keyword("and") {
            self.pos += 1;
            terms.push(self.parse_unary()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { NoteCondition::All(terms) })
    }

    fn parse_unary(&mut self) -> Result<NoteCondition, ConditionError> {
        if self.peek_keyword("not") && !matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op(_))) {
            self.pos += 1;
            return Ok(NoteCondition::Not(Box::new(self.parse_unary()?)));
        }
        self.parse_primary()
    }

    fn expect_close(&mut self, open_offset: usize) -> Result<(), ConditionError> {
        match self.next() {
            Some(Tok::RParen) => Ok(()),
            None => Err(ConditionError::UnbalancedParens { offset: open_offset }),
            Some(_) => {
                self.pos -= 1;
                Err(ConditionError::Unexpected { offset: self.offset(), expected: "')'" })
            }
        }
    }

    fn parse_primary(&mut self) -> Result<NoteCondition, ConditionError> {
        let offset = self.offset();
        match self.next() {
            Some(Tok::LParen) => {
                let inner = self.parse_or()?;
                self.expect_close(offset)?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if (name == "all" || name == "any") && self.peek() == Some(&Tok::LParen) {
                    let open = self.offset();
                    self.pos += 1;
                    let mut children = alloc::vec![self.parse_or()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        children.push(self.parse_or()?);
                    }
                    self.expect_close(open)?;
                    return Ok(if name == "all" {
                        NoteCondition::All(children)
                    } else {
                        NoteCondition::Any(children)
                    });
                }
                if name == "category" && self.peek() == Some(&Tok::Op(CompareOp::Contains)) {
                    self.pos += 1;
                    return match self.next() {
                        Some(Tok::Str(s)) => Ok(NoteCondition::HasCategory(s)),
                        _ => {
                            self.pos -= 1;
                            Err(ConditionError::Unexpected { offset: self.offset(), expected: "string literal" })
                        }
                    };
                }
                let op = match self.next() {
                    Some(Tok::Op(op)) => op,
                    None => {
                        return Err(ConditionError::Unexpected { offset: self.end, expected: "operator" })
                    }
                    Some(tok) => {
                        self.pos -= 1;
                        let offset = self.offset();
                        return Err(match tok {
                            Tok::Ident(found) => ConditionError::UnknownOperator { offset, found },
                            _ => ConditionError::Unexpected { offset, expected: "operator" },
                        });
                    }
                };
                if let Some(unit) = name.strip_prefix("any_side_") {
                    if unit.is_empty() || unit.contains('.') {
                        return Err(ConditionError::Unexpected { offset, expected: "unit after any_side_" });
                    }
                    if op == CompareOp::Contains {
                        return Err(ConditionError::UnknownOperator { offset, found: String::from("contains") });
                    }
                    return match self.next() {
                        Some(Tok::Num(threshold)) => Ok(NoteCondition::AnySide { op, threshold, unit: String::from(unit) }),
                        _ => {
                            self.pos -= 1;
                            Err(ConditionError::Unexpected { offset: self.offset(), expected: "number" })
                        }
                    };
                }
                if is_reserved(&name) || name.ends_with('.') || name.contains("..") {
                    return Err(ConditionError::Unexpected { offset, expected: "attribute name" });
                }
                let literal = match self.next() {
                    Some(Tok::Num(n)) => Literal::Number(n),
                    Some(Tok::Str(s)) => Literal::Text(s),
                    _ => {
                        self.pos -= 1;
                        return Err(ConditionError::Unexpected { offset: self.offset(), expected: "literal" });
                    }
                };
                Ok(NoteCondition::Compare { attr: name, op, literal })
            }
            Some(Tok::RParen) => Err(ConditionError::UnbalancedParens { offset }),
            Some(_) => Err(ConditionError::Unexpected { offset, expected: "condition" }),
            None => Err(ConditionError::Unexpected { offset, expected: "condition" }),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "and" | "or" | "not")
}

/// Parses condition source text into an AST.
pub fn parse_condition(text: &str) -> Result<NoteCondition, ConditionError> {
    if text.trim().is_empty() {
        return Err(ConditionError::Empty);
    }
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, end: text.len() };
    let cond = parser.parse_or()?;
    match parser.tokens.get(parser.pos) {
        None => Ok(cond),
        Some(Token { tok: Tok::RParen, offset }) => Err(ConditionError::UnbalancedParens { offset: *offset }),
        Some(Token { offset, .. }) => Err(ConditionError::Unexpected { offset: *offset, expected: "end of input" }),
    }
}
