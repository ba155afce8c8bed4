//! Typed KGTK cell values and their surface syntax.
//!
//! Surface forms:
//!
//! | value                      | surface          |
//! |----------------------------|------------------|
//! | `Symbol("Q5")`             | `Q5`             |
//! | `String("abc")`            | `"abc"`          |
//! | `LangString("John", "en")` | `'John'@en`      |
//! | `Number(396)`              | `396`            |
//! | `Empty`                    | (empty cell)     |
//!
//! Inside quoted literals a backslash escapes the delimiter quote, the
//! backslash itself, and `\t`, `\n`, `\r`. Unescaped delimiter quotes in the
//! interior are tolerated on input (`'Susan O'Brien'@en`) and escaped on
//! output.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// A numeric cell. Integers are exact over the whole `i64` range; anything
/// else is an `f64`. Integral floats are normalized to integers so that `5`
/// and `5.0` are the same value.
#[derive(Clone, Copy, Debug)]
pub struct Number(Repr);

#[derive(Clone, Copy, Debug)]
enum Repr {
    Int(i64),
    Float(f64),
}

const I64_LOWER: f64 = -9_223_372_036_854_775_808.0;
const I64_UPPER: f64 = 9_223_372_036_854_775_808.0;

impl Number {
    pub fn from_i64(value: i64) -> Self {
        Number(Repr::Int(value))
    }

    /// Returns `None` for NaN and infinities.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        if value.fract() == 0.0 && (I64_LOWER..I64_UPPER).contains(&value) {
            Some(Number(Repr::Int(value as i64)))
        } else {
            Some(Number(Repr::Float(value)))
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self.0 {
            Repr::Int(i) => Some(i),
            Repr::Float(_) => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self.0 {
            Repr::Int(i) => i as f64,
            Repr::Float(f) => f,
        }
    }

    /// Truncates toward zero; `None` when the result does not fit in `i64`.
    pub fn truncate(&self) -> Option<i64> {
        match self.0 {
            Repr::Int(i) => Some(i),
            Repr::Float(f) => {
                let t = f.trunc();
                (I64_LOWER..I64_UPPER).contains(&t).then_some(t as i64)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.0 {
            Repr::Int(i) => i == 0,
            Repr::Float(f) => f == 0.0,
        }
    }

    /// Parses a decimal or integer surface form. Returns `None` when the text
    /// is not numeric.
    pub fn parse(text: &str) -> Option<Self> {
        if !is_numeric_surface(text) {
            return None;
        }
        let digits = text.strip_prefix('+').unwrap_or(text);
        if digits.bytes().skip_while(|b| *b == b'-').all(|b| b.is_ascii_digit()) {
            if let Ok(i) = digits.parse::<i64>() {
                return Some(Number::from_i64(i));
            }
        }
        digits.parse::<f64>().ok().and_then(Number::from_f64)
    }
}

fn cmp_int_float(i: i64, f: f64) -> Ordering {
    if f >= I64_UPPER {
        return Ordering::Less;
    }
    if f < I64_LOWER {
        return Ordering::Greater;
    }
    let floor = f.floor();
    match i.cmp(&(floor as i64)) {
        Ordering::Equal if f > floor => Ordering::Less,
        other => other,
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (Repr::Int(a), Repr::Int(b)) => a.cmp(&b),
            (Repr::Float(a), Repr::Float(b)) => a.total_cmp(&b),
            (Repr::Int(a), Repr::Float(b)) => cmp_int_float(a, b),
            (Repr::Float(a), Repr::Int(b)) => cmp_int_float(b, a).reverse(),
        }
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.0 {
            Repr::Int(i) => {
                0u8.hash(state);
                i.hash(state);
            }
            Repr::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Int(i) => write!(f, "{i}"),
            // Debug gives the shortest representation that reparses exactly.
            Repr::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<i64> for Number {
    fn from(value: i64) -> Self {
        Number::from_i64(value)
    }
}

fn is_numeric_surface(text: &str) -> bool {
    let bytes = text.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - frac_start;
    }
    if int_digits + frac_digits == 0 {
        return false;
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        i += 1;
        if matches!(bytes.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == bytes.len()
}

/// One typed KGTK cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum KgtkValue {
    Empty,
    Number(Number),
    Symbol(String),
    String(String),
    LangString { text: String, lang: String },
}

impl KgtkValue {
    pub fn symbol(text: impl Into<String>) -> Self {
        KgtkValue::Symbol(text.into())
    }

    pub fn string(text: impl Into<String>) -> Self {
        KgtkValue::String(text.into())
    }

    pub fn lang_string(text: impl Into<String>, lang: impl Into<String>) -> Self {
        KgtkValue::LangString {
            text: text.into(),
            lang: lang.into(),
        }
    }

    pub fn int(value: i64) -> Self {
        KgtkValue::Number(Number::from_i64(value))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, KgtkValue::Empty)
    }

    pub fn as_number(&self) -> Option<Number> {
        match self {
            KgtkValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// Parses one TSV cell. See the module docs for the surface forms.
    pub fn parse(text: &str) -> Result<Self> {
        parse_value(text)
    }
}

pub fn parse_value(text: &str) -> Result<KgtkValue> {
    let malformed = |reason: &str| Error::MalformedValue {
        cell: text.to_string(),
        reason: reason.to_string(),
    };
    let first = match text.as_bytes().first() {
        None => return Ok(KgtkValue::Empty),
        Some(b) => *b,
    };
    if text.contains(['\t', '\n']) {
        return Err(malformed("cell contains a tab or newline"));
    }
    match first {
        b'"' => {
            if text.len() < 2 || !text.ends_with('"') || ends_with_escape(&text[..text.len() - 1]) {
                return Err(malformed("unterminated string literal"));
            }
            Ok(KgtkValue::String(unescape(&text[1..text.len() - 1])))
        }
        b'\'' => {
            let close = match text.rfind("'@") {
                Some(p) if p > 0 && !ends_with_escape(&text[..p]) => p,
                _ => {
                    return Err(if text.len() >= 2 && text.ends_with('\'') {
                        malformed("missing language tag")
                    } else {
                        malformed("unterminated language-qualified string")
                    })
                }
            };
            let lang = &text[close + 2..];
            if !is_language_tag(lang) {
                return Err(malformed("bad language tag"));
            }
            Ok(KgtkValue::LangString {
                text: unescape(&text[1..close]),
                lang: lang.to_string(),
            })
        }
        _ => Ok(match Number::parse(text) {
            Some(n) => KgtkValue::Number(n),
            None => KgtkValue::Symbol(text.to_string()),
        }),
    }
}

/// Canonical surface form of a value; `parse_value(&format_value(v)) == v`.
pub fn format_value(value: &KgtkValue) -> String {
    value.to_string()
}

impl fmt::Display for KgtkValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KgtkValue::Empty => Ok(()),
            KgtkValue::Number(n) => write!(f, "{n}"),
            KgtkValue::Symbol(s) => f.write_str(s),
            KgtkValue::String(s) => {
                f.write_str("\"")?;
                write_escaped(f, s, '"')?;
                f.write_str("\"")
            }
            KgtkValue::LangString { text, lang } => {
                f.write_str("'")?;
                write_escaped(f, text, '\'')?;
                write!(f, "'@{lang}")
            }
        }
    }
}

/// Total order over values: `Empty` first, then numbers in numeric order,
/// then every text-like value ordered by its canonical surface text.
pub fn compare_values(a: &KgtkValue, b: &KgtkValue) -> Ordering {
    fn rank(v: &KgtkValue) -> u8 {
        match v {
            KgtkValue::Empty => 0,
            KgtkValue::Number(_) => 1,
            _ => 2,
        }
    }
    match (a, b) {
        (KgtkValue::Number(x), KgtkValue::Number(y)) => x.cmp(y),
        (KgtkValue::Symbol(x), KgtkValue::Symbol(y)) => x.cmp(y),
        _ => match rank(a).cmp(&rank(b)) {
            Ordering::Equal if rank(a) == 2 => a.to_string().cmp(&b.to_string()),
            other => other,
        },
    }
}

impl Ord for KgtkValue {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_values(self, other)
    }
}

impl PartialOrd for KgtkValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let primary = parts.next().unwrap_or("");
    !primary.is_empty()
        && primary.bytes().all(|b| b.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_alphanumeric()))
}

fn ends_with_escape(prefix: &str) -> bool {
    prefix.bytes().rev().take_while(|b| *b == b'\\').count() % 2 == 1
}

fn unescape(body: &str) -> String {
    if !body.contains('\\') {
        return body.to_string();
    }
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(q @ ('\\' | '"' | '\'')) => out.push(q),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn write_escaped(f: &mut fmt::Formatter<'_>, text: &str, quote: char) -> fmt::Result {
    use fmt::Write;
    for c in text.chars() {
        match c {
            '\\' => f.write_str("\\\\")?,
            '\t' => f.write_str("\\t")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            c if c == quote => {
                f.write_char('\\')?;
                f.write_char(c)?;
            }
            c => f.write_char(c)?,
        }
    }
    Ok(())
}
